#pragma once

#include <string>
#include <vector>

#include "sdre/fom.hpp"
#include "sdre/rom_pod.hpp"

namespace sdre {

// Binary matrix: 8-byte tag "SDREMAT1", int64 rows, int64 cols, column-major doubles.
void write_matrix(const std::string& path, const Mat& A);
Mat read_matrix(const std::string& path);
void write_matrix_csv(const std::string& path, const Mat& A);

// <stem>.bin holds S, <stem>.json the provenance.
void save_snapshots(const std::string& stem, const SnapshotSet& snaps);
SnapshotSet load_snapshots(const std::string& stem);

void save_trajectories(const std::string& path, const std::vector<Trajectory>& traj,
                       const SolveStats& stats);
bool load_trajectories(const std::string& path, std::vector<Trajectory>& traj, SolveStats& stats);

}  // namespace sdre
