#include "chid/observation.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

#include "chid/error.hpp"
#include "chid/gram.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// max |phi| over 8 points per cell
double sup_norm(const PeriodicField& f) {
  const auto& mesh = f.basis.mesh();
  double m = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    for (int j = 0; j < 8; ++j) {
      m = std::max(m, std::abs(f.eval_local(cell, j / 8.0, 0)));
    }
  }
  return m;
}

}  // namespace

const char* to_string(Provenance p) {
  return p == Provenance::interpolation_only ? "interpolation-only"
                                             : "interpolation+synthetic-noise";
}

PeriodicField ObservationData::time_derivative_field(std::size_t k) const {
  if (k == 0 || k >= size()) {
    throw ValidationError("time derivative needs a previous data instant (k = " +
                          std::to_string(k) + ")");
  }
  return PeriodicField{basis, (phi[k] - phi[k - 1]) / tau};
}

std::size_t ObservationData::index_of(double t) const {
  const double r = std::round(t / tau);
  if (r < 0.0 || r >= static_cast<double>(size()) ||
      std::abs(t - r * tau) > 1e-9 * std::max(tau, std::abs(t))) {
    throw ValidationError("t = " + std::to_string(t) +
                          " is not a data instant");
  }
  return static_cast<std::size_t>(r);
}

std::vector<std::size_t> ObservationData::window(double t0, double t1) const {
  std::vector<std::size_t> out;
  const double slack = 1e-9 * tau;
  for (std::size_t k = 1; k < size(); ++k) {
    if (times[k] >= t0 - slack && times[k] <= t1 + slack) out.push_back(k);
  }
  return out;
}

std::uint64_t ObservationData::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  hash_bytes(h, &tau, sizeof tau);
  const std::uint64_t n = basis.mesh().n_cells();
  hash_bytes(h, &n, sizeof n);
  for (double t : times) hash_bytes(h, &t, sizeof t);
  for (const auto& v : phi) {
    hash_bytes(h, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  return h;
}

ObservationData restrict_to_data_grid(const Trajectory& traj,
                                      std::size_t factor) {
  if (factor < 1) throw ValidationError("coarsening factor must be positive");
  const auto& fine = traj.basis.mesh();
  if (traj.basis.kind() != BasisKind::quadratic_fe) {
    throw ValidationError("trajectory must use the P2 basis");
  }
  if (fine.n_cells() % factor != 0) {
    throw ValidationError("cell count " + std::to_string(fine.n_cells()) +
                          " is not divisible by " + std::to_string(factor));
  }
  if (traj.steps() % factor != 0) {
    throw ValidationError("step count " + std::to_string(traj.steps()) +
                          " is not divisible by " + std::to_string(factor));
  }
  const PeriodicMesh coarse(fine.n_cells() / factor);
  ObservationData data{SpatialBasis(BasisKind::periodic_cubic_spline, coarse)};
  data.tau = traj.tau * static_cast<double>(factor);
  const auto& rule = gauss_legendre(6);
  const auto n = static_cast<Eigen::Index>(coarse.n_cells());
  double discrepancy = 0.0;
  for (std::size_t k = 0; k < traj.size(); k += factor) {
    // P2 vertex dofs sit at even indices; coarse node i is fine vertex factor*i
    Eigen::VectorXd nodal(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      nodal[i] = traj.phi[k][static_cast<Eigen::Index>(2 * factor) * i];
    }
    PeriodicField spline = spline_from_nodal_values(coarse, nodal);
    const PeriodicField fine_field = traj.phi_field(k);
    double err = 0.0;
    for (std::size_t cell = 0; cell < fine.n_cells(); ++cell) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = fine.node(cell) + rule.points[q] * fine.h();
        const double d0 = spline.eval(x, 0) - fine_field.eval_local(cell, rule.points[q], 0);
        const double d1 = spline.eval(x, 1) - fine_field.eval_local(cell, rule.points[q], 1);
        err += rule.weights[q] * fine.h() * (d0 * d0 + d1 * d1);
      }
    }
    discrepancy = std::max(discrepancy, std::sqrt(err));
    data.times.push_back(static_cast<double>(data.times.size()) * data.tau);
    data.phi.push_back(std::move(spline.coeffs));
  }
  data.interpolation_discrepancy = discrepancy;
  data.noise_level = discrepancy;
  data.provenance = Provenance::interpolation_only;
  return data;
}

PeriodicField projected_laplacian(const PeriodicField& phi) {
  const GramFactor l2(assemble_grams(phi.basis).l2);
  const SparseMatrix stiffness = assemble_stiffness(phi.basis);
  return PeriodicField{phi.basis,
                       -l2.solve(Eigen::VectorXd(stiffness * phi.coeffs))};
}

PeriodicField chemical_potential_from_data(const ObservationData& data,
                                           std::size_t k, double gamma,
                                           const ParameterFunction& potential) {
  const PeriodicField phi = data.field(k);
  const GramFactor l2(assemble_grams(data.basis).l2);
  const Eigen::VectorXd f_proj = l2.solve(load_vector(
      data.basis,
      [&](double x) { return potential.eval(phi.eval(x, 0), 1); }, 8));
  return PeriodicField{data.basis,
                       -gamma * projected_laplacian(phi).coeffs + f_proj};
}

Eigen::VectorXd time_derivative(const ObservationData& data, std::size_t k) {
  const PeriodicField dt = data.time_derivative_field(k);
  const GramPair grams = assemble_grams(data.basis);
  return grams.l2 * dt.coeffs;
}

NoiseMeasures measure_perturbation(const ObservationData& reference,
                                   const ObservationData& perturbed) {
  if (reference.size() != perturbed.size() ||
      !(reference.basis == perturbed.basis)) {
    throw ValidationError("datasets are not on the same grid");
  }
  const GramPair grams = assemble_grams(reference.basis);
  const GramFactor h1(grams.h1);
  NoiseMeasures m;
  double l2_time = 0.0;
  Eigen::VectorXd prev;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const Eigen::VectorXd eta = perturbed.phi[k] - reference.phi[k];
    const PeriodicField f{reference.basis, eta};
    m.h3_max = std::max(m.h3_max, std::sqrt(sobolev_norm_squared(f, 3)));
    m.h1_max = std::max(m.h1_max, std::sqrt(sobolev_norm_squared(f, 1)));
    if (k > 0) {
      const double d = h1.dual_norm(grams.l2 * ((eta - prev) / reference.tau));
      m.dt_hm1_max = std::max(m.dt_hm1_max, d);
      l2_time += reference.tau * d * d;
    }
    prev = eta;
  }
  m.dt_hm1_l2 = std::sqrt(l2_time);
  return m;
}

ObservationData inject_noise(const ObservationData& data, double delta,
                             std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ValidationError("noise level must be >= 0");
  if (delta == 0.0) return data;
  const auto& mesh = data.basis.mesh();
  const std::size_t modes = std::max<std::size_t>(1, std::min<std::size_t>(8, mesh.n_cells() / 4));
  std::mt19937_64 gen(seed);
  std::vector<double> amp(modes);
  std::vector<double> phase(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    const double k = static_cast<double>(j + 1);
    amp[j] = (0.5 + uniform01(gen)) / (k * k);
    phase[j] = 2.0 * std::numbers::pi * uniform01(gen);
  }
  const double t0 = data.times.front();
  const double span = data.times.back() - t0;
  ObservationData out = data;
  const auto n = static_cast<Eigen::Index>(mesh.n_cells());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double theta =
        span > 0.0 ? 2.0 * std::numbers::pi * (data.times[k] - t0) / span : 0.0;
    Eigen::VectorXd nodal(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = mesh.node(static_cast<std::size_t>(i));
      double g0 = 0.0;
      double g1 = 0.0;
      for (std::size_t j = 0; j < modes; ++j) {
        const double arg =
            2.0 * std::numbers::pi * static_cast<double>(j + 1) * x + phase[j];
        g0 += amp[j] * std::cos(arg);
        g1 += amp[j] * std::sin(arg);
      }
      nodal[i] = std::cos(theta) * g0 + std::sin(theta) * g1;
    }
    PeriodicField eta = spline_from_nodal_values(mesh, nodal);
    eta.coeffs *= delta / std::sqrt(sobolev_norm_squared(eta, 3));
    out.phi[k] += eta.coeffs;
    if (sup_norm(out.field(k)) >= 1.0) {
      throw ValidationError("noisy data leave (-1, 1) at t = " +
                            std::to_string(data.times[k]) +
                            "; lower the noise level");
    }
  }
  out.noise_level = delta;
  out.provenance = Provenance::interpolation_with_noise;
  out.noise = measure_perturbation(data, out);
  return out;
}

}  // namespace chid
