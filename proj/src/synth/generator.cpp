// Copyright 2026 The survcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "survcl/synth/generator.hpp"

#include "survcl/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace survcl::synth {

namespace {

using Rng = std::mt19937_64;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd gaussian(std::size_t n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = dist(rng);
  return v;
}

MatrixXd gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

VectorXd unit(std::size_t n, Rng& rng) {
  VectorXd v = gaussian(n, rng);
  return v / v.norm();
}

// Orthogonal matrix near the identity: Q factor of I + strength * G with the
// signs fixed so that Q -> I as strength -> 0.
MatrixXd rotation(std::size_t n, double strength, Rng& rng) {
  MatrixXd m = MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) +
               strength * gaussian(n, n, rng);
  Eigen::HouseholderQR<MatrixXd> qr(m);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

// Embedding of a latent vector into a feature space with unit-norm columns.
MatrixXd loading(std::size_t out, std::size_t latent, Rng& rng) {
  MatrixXd m = gaussian(out, latent, rng);
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= m.col(j).norm();
  return m;
}

double to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

// Censoring rate whose expected censored fraction over the given event rates
// equals target, found by bisection on the log scale.
double calibrate_censoring(const std::vector<double>& event_rates, double target) {
  if (target <= 0.0) return 0.0;
  auto fraction = [&](double rho) {
    double total = 0.0;
    for (double lambda : event_rates) total += rho / (rho + lambda);
    return total / static_cast<double>(event_rates.size());
  };
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fraction(std::exp(mid)) < target ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

struct TaskModel {
  MatrixXd patch_rotation;
  std::vector<MatrixXd> group_rotation;
  VectorXd specific_patch;
  VectorXd specific_genomic;
  double baseline = 0.0;
};

}  // namespace

void validate(const GeneratorConfig& cfg) {
  if (cfg.n_tasks == 0) throw ConfigError("generator: n_tasks must be positive");
  if (cfg.cases_per_task < cfg.n_bins) throw ConfigError("generator: too few cases per task");
  if (cfg.min_patches == 0 || cfg.min_patches > cfg.max_patches) {
    throw ConfigError("generator: need 1 <= min_patches <= max_patches");
  }
  if (cfg.patch_dim == 0 || cfg.latent_dim == 0) {
    throw ConfigError("generator: dimensions must be positive");
  }
  if (cfg.latent_dim + 1 > cfg.patch_dim) {
    throw ConfigError("generator: patch_dim must exceed latent_dim");
  }
  for (auto d : cfg.genomic_dims) {
    if (d == 0) throw ConfigError("generator: genomic group widths must be positive");
  }
  if (!(cfg.signal_fraction > 0.0 && cfg.signal_fraction <= 1.0)) {
    throw ConfigError("generator: signal_fraction must lie in (0, 1]");
  }
  for (double s : {cfg.signal_marker, cfg.feature_noise, cfg.shared_scale, cfg.specific_scale,
                   cfg.cross_strength, cfg.task_shift, cfg.baseline_spread}) {
    if (!(s >= 0.0)) throw ConfigError("generator: scales must be nonnegative");
  }
  if (!(cfg.censor_rate >= 0.0 && cfg.censor_rate < 1.0)) {
    throw ConfigError("generator: censor_rate must lie in [0, 1)");
  }
  if (!(cfg.baseline_hazard > 0.0)) throw ConfigError("generator: baseline_hazard must be positive");
}

SyntheticStream generate_stream(const GeneratorConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t q = cfg.latent_dim;

  // Structure shared by all tasks.
  const MatrixXd patch_loading = loading(cfg.patch_dim, q, rng);
  VectorXd marker = gaussian(cfg.patch_dim, rng);
  // Keep the marker orthogonal to the latent loadings.
  const Eigen::HouseholderQR<MatrixXd> loading_qr(patch_loading);
  const MatrixXd basis = MatrixXd(loading_qr.householderQ()).leftCols(static_cast<Eigen::Index>(q));
  marker -= basis * (basis.transpose() * marker);
  marker /= marker.norm();
  std::vector<MatrixXd> group_loading;
  for (auto d : cfg.genomic_dims) group_loading.push_back(loading(d, q, rng));
  const VectorXd shared_patch = unit(q, rng);
  const VectorXd shared_genomic = unit(q, rng);

  std::vector<TaskModel> tasks(cfg.n_tasks);
  std::uniform_real_distribution<double> spread(-cfg.baseline_spread, cfg.baseline_spread);
  for (auto& t : tasks) {
    t.patch_rotation = rotation(cfg.patch_dim, cfg.task_shift, rng);
    for (auto d : cfg.genomic_dims) t.group_rotation.push_back(rotation(d, cfg.task_shift, rng));
    t.specific_patch = unit(q, rng);
    t.specific_genomic = unit(q, rng);
    t.baseline = cfg.baseline_hazard * std::exp(spread(rng));
  }

  SyntheticStream out;
  std::normal_distribution<double> noise(0.0, cfg.feature_noise);
  std::uniform_int_distribution<std::size_t> bag_size(cfg.min_patches, cfg.max_patches);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double pair_norm = 1.0 / std::sqrt(2.0);
  const double cross_norm = 1.0 / std::sqrt(static_cast<double>(q));
  std::size_t width = 0;
  for (auto d : cfg.genomic_dims) width = std::max(width, d);

  for (std::size_t k = 0; k < cfg.n_tasks; ++k) {
    const TaskModel& tm = tasks[k];
    TaskDataset task;
    task.name = "task" + std::to_string(k);
    task.task = static_cast<int>(k);
    task.genomic_dims = cfg.genomic_dims;
    std::vector<CaseOracle> oracle;
    std::vector<double> rates;
    std::vector<double> event_times;

    for (std::size_t i = 0; i < cfg.cases_per_task; ++i) {
      const VectorXd a = gaussian(q, rng);
      const VectorXd b = gaussian(q, rng);
      CaseOracle o;
      o.patch_only = pair_norm * (cfg.shared_scale * shared_patch.dot(a) +
                                  cfg.specific_scale * tm.specific_patch.dot(a));
      o.genomic_only = pair_norm * (cfg.shared_scale * shared_genomic.dot(b) +
                                    cfg.specific_scale * tm.specific_genomic.dot(b));
      o.cross = cfg.cross_strength * cross_norm * a.dot(b);
      o.log_risk = o.patch_only + o.genomic_only + o.cross;

      CaseRecord c;
      c.id = task.name + "_" + std::to_string(i);
      c.task = task.task;
      const std::size_t n_patches = bag_size(rng);
      const auto n_signal = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(cfg.signal_fraction * static_cast<double>(n_patches))));
      c.patches.features.resize(static_cast<Eigen::Index>(n_patches),
                                static_cast<Eigen::Index>(cfg.patch_dim));
      const VectorXd signal = patch_loading * a + cfg.signal_marker * marker;
      for (std::size_t p = 0; p < n_patches; ++p) {
        VectorXd x = p < n_signal ? signal : VectorXd::Zero(static_cast<Eigen::Index>(cfg.patch_dim));
        for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += noise(rng);
        x = tm.patch_rotation * x;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          c.patches.features(static_cast<Eigen::Index>(p), j) = to_float(x(j));
        }
      }
      // Signal patches are not always first in the bag.
      for (std::size_t p = n_patches - 1; p > 0; --p) {
        std::uniform_int_distribution<std::size_t> pick(0, p);
        const std::size_t other = pick(rng);
        if (other != p) {
          c.patches.features.row(static_cast<Eigen::Index>(p))
              .swap(c.patches.features.row(static_cast<Eigen::Index>(other)));
        }
      }

      c.genomics.groups = ad::Matrix::Zero(kGenomicGroups, static_cast<Eigen::Index>(width));
      for (std::size_t g = 0; g < kGenomicGroups; ++g) {
        VectorXd y = group_loading[g] * b;
        for (Eigen::Index j = 0; j < y.size(); ++j) y(j) += noise(rng);
        y = tm.group_rotation[g] * y;
        for (Eigen::Index j = 0; j < y.size(); ++j) {
          c.genomics.groups(static_cast<Eigen::Index>(g), j) = to_float(y(j));
        }
      }

      const double rate = tm.baseline * std::exp(o.log_risk);
      std::exponential_distribution<double> event(rate);
      rates.push_back(rate);
      event_times.push_back(event(rng));
      oracle.push_back(o);
      task.cases.push_back(std::move(c));
    }

    const double censor_rate = calibrate_censoring(rates, cfg.censor_rate);
    for (std::size_t i = 0; i < task.cases.size(); ++i) {
      auto& c = task.cases[i];
      double censor_time = std::numeric_limits<double>::infinity();
      if (censor_rate > 0.0) {
        std::exponential_distribution<double> cens(censor_rate);
        censor_time = cens(rng);
      }
      c.censor = censor_time < event_times[i] ? 1 : 0;
      c.time = std::min(event_times[i], censor_time);
    }
    std::size_t events = 0;
    for (const auto& c : task.cases) events += c.censor == 0 ? 1 : 0;
    if (events < cfg.n_bins) {
      throw DataError("generator: task " + std::to_string(k) + " has only " +
                      std::to_string(events) + " uncensored cases");
    }
    assign_labels(task, cfg.n_bins);
    out.stream.tasks.push_back(std::move(task));
    out.oracle.push_back(std::move(oracle));
  }
  return out;
}

}  // namespace survcl::synth
