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

#include "survcl/io/report.hpp"

#include "survcl/error.hpp"
#include "survcl/model/backbone.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

namespace survcl::io {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError(path + ": write failed");
}

json summary_json(const harness::PerformanceMatrix& r) {
  const auto s = harness::summarize(r);
  json j = json::object();
  if (s.average) j["average"] = *s.average;
  if (s.forget) j["forget"] = *s.forget;
  if (s.bwt) j["bwt"] = *s.bwt;
  if (s.fwt) j["fwt"] = *s.fwt;
  return j;
}

json trained_average_json(const harness::PerformanceMatrix& r) {
  json rows = json::array();
  for (std::size_t l = 1; l <= r.n_tasks(); ++l) {
    bool filled = true;
    for (std::size_t c = 0; c < l; ++c) filled = filled && r.has(l, c);
    rows.push_back(filled ? json(harness::average_on_trained(r, l)) : json(nullptr));
  }
  return rows;
}

void write_steps(std::ofstream& out, const char* group, const std::vector<survival::SurvivalStep>& steps,
                 const KmReport& report) {
  for (const auto& s : steps) {
    out << group << ',' << num(s.time) << ',' << num(s.survival) << ',' << s.at_risk << ','
        << s.events << ',' << num(report.test.chi2) << ',' << num(report.test.p_value) << ','
        << (report.significant ? 1 : 0) << '\n';
  }
}

}  // namespace

json metrics_json(const harness::SequenceResult& result, harness::Method method, std::uint64_t seed) {
  json j;
  j["method"] = harness::method_name(method);
  j["seed"] = seed;
  j["n_tasks"] = result.c_index.n_tasks();
  j["c_index"] = summary_json(result.c_index);
  j["c_index_ipcw"] = summary_json(result.c_index_ipcw);
  j["average_on_trained"] = {{"c_index", trained_average_json(result.c_index)},
                             {"c_index_ipcw", trained_average_json(result.c_index_ipcw)}};
  return j;
}

json aggregate_json(std::span<const json> runs) {
  std::map<std::string, std::vector<const json*>> by_method;
  for (const auto& r : runs) by_method[r.at("method").get<std::string>()].push_back(&r);
  json out = json::object();
  for (const auto& [method, list] : by_method) {
    json m;
    m["seeds"] = json::array();
    for (const auto* r : list) m["seeds"].push_back(r->at("seed"));
    for (const char* tag : {"c_index", "c_index_ipcw"}) {
      json block = json::object();
      for (const char* metric : {"average", "forget", "bwt", "fwt"}) {
        std::vector<double> values;
        for (const auto* r : list) {
          const auto& t = r->at(tag);
          if (t.contains(metric)) values.push_back(t.at(metric).get<double>());
        }
        if (values.empty()) continue;
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        json entry = {{"mean", mean}, {"n", values.size()}};
        if (values.size() > 1) {
          double ss = 0.0;
          for (double v : values) ss += (v - mean) * (v - mean);
          entry["std"] = std::sqrt(ss / (n - 1.0));
        }
        block[metric] = entry;
      }
      m[tag] = block;
    }
    out[method] = m;
  }
  return out;
}

void write_json(const json& j, const std::string& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void write_matrix_csv(const harness::PerformanceMatrix& r, const std::string& path) {
  auto out = open_output(path);
  out << "row";
  for (std::size_t c = 0; c < r.n_tasks(); ++c) out << ",task" << c + 1;
  out << '\n';
  for (std::size_t l = 0; l < r.rows(); ++l) {
    out << l;
    for (std::size_t c = 0; c < r.n_tasks(); ++c) {
      out << ',';
      if (const auto v = r.get(l, c)) out << num(*v);
    }
    out << '\n';
  }
  finish(out, path);
}

void write_routing_csv(std::span<const harness::RoutingRecord> records, const std::string& path) {
  auto out = open_output(path);
  out << "task_id,module_site,expert_idx,proportion\n";
  for (const auto& r : records) {
    out << r.task << ',' << model::kMoESiteNames[static_cast<std::size_t>(r.site)] << ','
        << r.expert << ',' << num(r.proportion) << '\n';
  }
  finish(out, path);
}

void write_curves_csv(std::span<const harness::EpochRecord> curve, const std::string& path) {
  auto out = open_output(path);
  out << "task,epoch,train_loss,validation_c_index\n";
  for (const auto& e : curve) {
    out << e.task << ',' << e.epoch << ',' << num(e.train_loss) << ','
        << num(e.validation_c_index) << '\n';
  }
  finish(out, path);
}

KmReport km_split(std::span<const double> risks, std::span<const double> times,
                  std::span<const int> censor) {
  if (risks.size() != times.size() || risks.size() != censor.size()) {
    throw DimensionError("risk, time and censor lengths differ");
  }
  if (risks.empty()) throw DataError("degenerate split: no cases");
  const double mean =
      std::accumulate(risks.begin(), risks.end(), 0.0) / static_cast<double>(risks.size());
  std::vector<double> t_low, t_high;
  std::vector<int> e_low, e_high;
  for (std::size_t i = 0; i < risks.size(); ++i) {
    const bool high = risks[i] > mean;
    (high ? t_high : t_low).push_back(times[i]);
    (high ? e_high : e_low).push_back(censor[i] == 0 ? 1 : 0);
  }
  if (t_low.empty() || t_high.empty()) {
    throw DataError("degenerate split: one risk group is empty");
  }
  KmReport report;
  report.low = survival::km_estimator(t_low, e_low);
  report.high = survival::km_estimator(t_high, e_high);
  report.test = survival::log_rank_test(t_low, e_low, t_high, e_high);
  report.significant = report.test.p_value < kSignificanceLevel;
  return report;
}

void write_km_csv(const KmReport& report, const std::string& path) {
  auto out = open_output(path);
  out << "group,time,survival,at_risk,events,chi2,p_value,significant\n";
  write_steps(out, "low", report.low, report);
  write_steps(out, "high", report.high, report);
  finish(out, path);
}

KmReport emit_km_csv(const model::Backbone& net, const TaskDataset& data,
                     std::span<const std::size_t> indices, const std::string& path) {
  if (!net.has_task(data.task)) {
    throw ContractError("model has no head for task '" + data.name + "'");
  }
  const auto risks = harness::predict_risks(net, data, indices);
  std::vector<double> times;
  std::vector<int> censor;
  for (std::size_t i : indices) {
    times.push_back(data.cases.at(i).time);
    censor.push_back(data.cases.at(i).censor);
  }
  auto report = km_split(risks, times, censor);
  write_km_csv(report, path);
  return report;
}

}  // namespace survcl::io
