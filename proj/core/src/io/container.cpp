#include "chid/io/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "chid/error.hpp"

namespace chid::io {
namespace {

constexpr std::array<char, 8> kTrajectoryMagic{'C', 'H', 'I', 'D', 'T', 'R', 'J', '1'};
constexpr std::array<char, 8> kObservationMagic{'C', 'H', 'I', 'D', 'O', 'B', 'S', '1'};

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ValidationError("cannot write '" + path + "'");
  }

  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

  template <class U>
  void unsigned_le(U v) {
    std::array<char, sizeof(U)> b;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    bytes(b.data(), b.size());
  }
  void f64(double v) { unsigned_le(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }

  void finish() {
    out_.flush();
    if (!out_) throw ValidationError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ValidationError("cannot read '" + path + "'");
  }

  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw ValidationError("'" + path_ + "' is truncated");
  }
  template <class U>
  U unsigned_le() {
    std::array<unsigned char, sizeof(U)> b;
    bytes(reinterpret_cast<char*>(b.data()), b.size());
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(unsigned_le<std::uint64_t>()); }
  Eigen::VectorXd vec(std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = f64();
    return v;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw ValidationError("'" + path_ + "' has trailing bytes");
    }
  }

 private:
  std::string path_;
  std::ifstream in_;
};

struct Header {
  BasisKind basis;
  std::uint64_t n_cells;
  std::uint64_t n_states;
  std::uint64_t n_dofs;
  double tau;
};

void write_header(Writer& w, const std::array<char, 8>& magic, const Header& h) {
  w.bytes(magic.data(), magic.size());
  w.unsigned_le<std::uint32_t>(kContainerVersion);
  w.unsigned_le<std::uint32_t>(h.basis == BasisKind::quadratic_fe ? 0u : 1u);
  w.unsigned_le<std::uint64_t>(h.n_cells);
  w.unsigned_le<std::uint64_t>(h.n_states);
  w.unsigned_le<std::uint64_t>(h.n_dofs);
  w.f64(h.tau);
}

Header read_header(Reader& r, const std::array<char, 8>& magic,
                   const std::string& path) {
  std::array<char, 8> m{};
  r.bytes(m.data(), m.size());
  if (m != magic) throw ValidationError("'" + path + "' has the wrong container type");
  const auto version = r.unsigned_le<std::uint32_t>();
  if (version != kContainerVersion) {
    throw ValidationError("'" + path + "' has unsupported version " +
                          std::to_string(version));
  }
  const auto basis = r.unsigned_le<std::uint32_t>();
  if (basis > 1) throw ValidationError("'" + path + "' has an unknown basis kind");
  Header h{basis == 0 ? BasisKind::quadratic_fe : BasisKind::periodic_cubic_spline,
           r.unsigned_le<std::uint64_t>(), r.unsigned_le<std::uint64_t>(),
           r.unsigned_le<std::uint64_t>(), r.f64()};
  const SpatialBasis sb(h.basis, PeriodicMesh(h.n_cells));
  if (sb.dof_count() != h.n_dofs) {
    throw ValidationError("'" + path + "' has inconsistent dimensions");
  }
  return h;
}

void write_manifest(const std::string& path, const char* kind, const Header& h,
                    const std::string& extra) {
  nlohmann::ordered_json j;
  j["format"] = kind;
  j["version"] = kContainerVersion;
  j["byte_order"] = "little-endian";
  j["basis"] = to_string(h.basis);
  j["n_cells"] = h.n_cells;
  j["n_states"] = h.n_states;
  j["n_dofs"] = h.n_dofs;
  j["tau"] = h.tau;
  j["extra"] = nlohmann::ordered_json::parse(extra);
  std::ofstream out(path + ".json", std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + ".json'");
  out << j.dump(2) << "\n";
}

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj,
                      const std::string& manifest_extra) {
  const Header h{traj.basis.kind(), traj.basis.mesh().n_cells(), traj.size(),
                 traj.basis.dof_count(), traj.tau};
  Writer w(path);
  write_header(w, kTrajectoryMagic, h);
  for (double t : traj.times) w.f64(t);
  for (const auto& v : traj.phi) w.vec(v);
  for (const auto& v : traj.mu) w.vec(v);
  w.finish();
  write_manifest(path, "chid-trajectory", h, manifest_extra);
}

Trajectory read_trajectory(const std::string& path) {
  Reader r(path);
  const Header h = read_header(r, kTrajectoryMagic, path);
  Trajectory traj{SpatialBasis(h.basis, PeriodicMesh(h.n_cells)), h.tau, {}, {}, {}};
  for (std::uint64_t k = 0; k < h.n_states; ++k) traj.times.push_back(r.f64());
  for (std::uint64_t k = 0; k < h.n_states; ++k) traj.phi.push_back(r.vec(h.n_dofs));
  for (std::uint64_t k = 0; k < h.n_states; ++k) traj.mu.push_back(r.vec(h.n_dofs));
  r.expect_end();
  return traj;
}

void write_observation(const std::string& path, const ObservationData& data,
                       const std::string& manifest_extra) {
  const Header h{data.basis.kind(), data.basis.mesh().n_cells(), data.size(),
                 data.basis.dof_count(), data.tau};
  Writer w(path);
  write_header(w, kObservationMagic, h);
  for (double t : data.times) w.f64(t);
  for (const auto& v : data.phi) w.vec(v);
  w.f64(data.noise_level);
  w.f64(data.interpolation_discrepancy);
  w.unsigned_le<std::uint32_t>(
      data.provenance == Provenance::interpolation_only ? 0u : 1u);
  w.f64(data.noise.h3_max);
  w.f64(data.noise.h1_max);
  w.f64(data.noise.dt_hm1_max);
  w.f64(data.noise.dt_hm1_l2);
  w.finish();
  write_manifest(path, "chid-observation", h, manifest_extra);
}

ObservationData read_observation(const std::string& path) {
  Reader r(path);
  const Header h = read_header(r, kObservationMagic, path);
  ObservationData data(SpatialBasis(h.basis, PeriodicMesh(h.n_cells)));
  data.tau = h.tau;
  for (std::uint64_t k = 0; k < h.n_states; ++k) data.times.push_back(r.f64());
  for (std::uint64_t k = 0; k < h.n_states; ++k) data.phi.push_back(r.vec(h.n_dofs));
  data.noise_level = r.f64();
  data.interpolation_discrepancy = r.f64();
  const auto prov = r.unsigned_le<std::uint32_t>();
  if (prov > 1) throw ValidationError("'" + path + "' has an unknown provenance");
  data.provenance =
      prov == 0 ? Provenance::interpolation_only : Provenance::interpolation_with_noise;
  data.noise.h3_max = r.f64();
  data.noise.h1_max = r.f64();
  data.noise.dt_hm1_max = r.f64();
  data.noise.dt_hm1_l2 = r.f64();
  r.expect_end();
  return data;
}

}  // namespace chid::io
