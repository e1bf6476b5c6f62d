#include "sdre/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace sdre {

namespace {

constexpr char kTag[8] = {'S', 'D', 'R', 'E', 'M', 'A', 'T', '1'};

void put_matrix(std::ostream& os, const Mat& A) {
  const std::int64_t r = A.rows(), c = A.cols();
  os.write(kTag, 8);
  os.write(reinterpret_cast<const char*>(&r), sizeof r);
  os.write(reinterpret_cast<const char*>(&c), sizeof c);
  os.write(reinterpret_cast<const char*>(A.data()), static_cast<std::streamsize>(sizeof(double) * r * c));
}

Mat get_matrix(std::istream& is, const std::string& path) {
  char tag[8];
  std::int64_t r = 0, c = 0;
  is.read(tag, 8);
  is.read(reinterpret_cast<char*>(&r), sizeof r);
  is.read(reinterpret_cast<char*>(&c), sizeof c);
  if (!is || std::memcmp(tag, kTag, 8) != 0 || r < 0 || c < 0)
    throw Error(ErrorKind::Io, "bad matrix header in " + path);
  Mat A(r, c);
  is.read(reinterpret_cast<char*>(A.data()), static_cast<std::streamsize>(sizeof(double) * r * c));
  if (!is) throw Error(ErrorKind::Io, "truncated matrix in " + path);
  return A;
}

}  // namespace

void write_matrix(const std::string& path, const Mat& A) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path);
  put_matrix(os, A);
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

Mat read_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return get_matrix(is, path);
}

void write_matrix_csv(const std::string& path, const Mat& A) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path);
  os.precision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) os << (j ? "," : "") << A(i, j);
    os << "\n";
  }
}

void save_snapshots(const std::string& stem, const SnapshotSet& snaps) {
  write_matrix(stem + ".bin", snaps.S);
  nlohmann::json j;
  j["rows"] = snaps.S.rows();
  j["cols"] = snaps.S.cols();
  for (const auto& [param, t] : snaps.provenance) j["provenance"].push_back({param, t});
  std::ofstream os(stem + ".json");
  if (!os) throw Error(ErrorKind::Io, "cannot open " + stem + ".json");
  os << j.dump(2) << "\n";
}

SnapshotSet load_snapshots(const std::string& stem) {
  SnapshotSet out;
  out.S = read_matrix(stem + ".bin");
  std::ifstream is(stem + ".json");
  if (!is) throw Error(ErrorKind::Io, "cannot open " + stem + ".json");
  const nlohmann::json j = nlohmann::json::parse(is);
  for (const auto& e : j.at("provenance")) out.provenance.emplace_back(e[0].get<int>(), e[1].get<double>());
  if (static_cast<Eigen::Index>(out.provenance.size()) != out.S.cols())
    throw Error(ErrorKind::Io, "provenance does not match the snapshot matrix");
  return out;
}

void save_trajectories(const std::string& path, const std::vector<Trajectory>& traj,
                       const SolveStats& stats) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path);
  Mat meta(1, 5);
  meta << double(traj.size()), double(stats.solves), double(stats.lyapunov_solves),
      stats.riccati_seconds, stats.wall_seconds;
  put_matrix(os, meta);
  Mat extra(1, 1);
  extra << stats.max_closed_loop_eig;
  put_matrix(os, extra);
  for (const Trajectory& tr : traj) {
    put_matrix(os, Eigen::Map<const Vec>(tr.times.data(), tr.times.size()));
    put_matrix(os, tr.states);
    put_matrix(os, tr.controls);
    Vec it(tr.riccati_iters.size());
    for (std::size_t k = 0; k < tr.riccati_iters.size(); ++k) it(k) = tr.riccati_iters[k];
    put_matrix(os, it);
  }
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

bool load_trajectories(const std::string& path, std::vector<Trajectory>& traj, SolveStats& stats) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  const Mat meta = get_matrix(is, path);
  const Mat extra = get_matrix(is, path);
  traj.assign(static_cast<std::size_t>(meta(0, 0)), {});
  stats.solves = static_cast<long>(meta(0, 1));
  stats.lyapunov_solves = static_cast<long>(meta(0, 2));
  stats.riccati_seconds = meta(0, 3);
  stats.wall_seconds = meta(0, 4);
  stats.max_closed_loop_eig = extra(0, 0);
  for (Trajectory& tr : traj) {
    const Mat t = get_matrix(is, path);
    tr.times.assign(t.data(), t.data() + t.size());
    tr.states = get_matrix(is, path);
    tr.controls = get_matrix(is, path);
    const Mat it = get_matrix(is, path);
    for (Eigen::Index k = 0; k < it.size(); ++k) tr.riccati_iters.push_back(static_cast<int>(it(k)));
    tr.wall_time = stats.wall_seconds;
  }
  return true;
}

}  // namespace sdre
