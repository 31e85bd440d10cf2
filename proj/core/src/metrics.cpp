#include "lppo/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lppo/error.hpp"

namespace lppo {

namespace {

constexpr const char* kCsvHeader =
    "epoch,step,mean_reward,mean_pass_rate,w_min,w_mean,w_max,kl,active_ratio,prefix_ratio,"
    "n_improving,n_plateauing,n_degrading";

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

nlohmann::json to_json(const StepRecord& r) {
  return {{"epoch", r.epoch},           {"step", r.step},
          {"mean_reward", r.mean_reward}, {"mean_pass_rate", r.mean_pass_rate},
          {"w_min", r.w_min},           {"w_mean", r.w_mean},
          {"w_max", r.w_max},           {"kl", r.kl},
          {"active_ratio", r.active_ratio}, {"prefix_ratio", r.prefix_ratio},
          {"n_improving", r.n_improving}, {"n_plateauing", r.n_plateauing},
          {"n_degrading", r.n_degrading}};
}

StepRecord step_record_from_json(const nlohmann::json& j) {
  StepRecord r;
  r.epoch = j.at("epoch").get<std::int64_t>();
  r.step = j.at("step").get<std::int64_t>();
  r.mean_reward = j.at("mean_reward").get<double>();
  r.mean_pass_rate = j.at("mean_pass_rate").get<double>();
  r.w_min = j.at("w_min").get<double>();
  r.w_mean = j.at("w_mean").get<double>();
  r.w_max = j.at("w_max").get<double>();
  r.kl = j.at("kl").get<double>();
  r.active_ratio = j.at("active_ratio").get<double>();
  r.prefix_ratio = j.at("prefix_ratio").get<double>();
  r.n_improving = j.at("n_improving").get<std::size_t>();
  r.n_plateauing = j.at("n_plateauing").get<std::size_t>();
  r.n_degrading = j.at("n_degrading").get<std::size_t>();
  return r;
}

std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::Improving: return "improving";
    case Trend::Plateauing: return "plateauing";
    case Trend::Degrading: return "degrading";
    case Trend::Undefined: return "undefined";
  }
  return "undefined";
}

Trend classify_trend(std::optional<double> progress, double tau) {
  if (tau < 0.0) throw Error("classify_trend: tau must be >= 0");
  if (!progress) return Trend::Undefined;
  if (*progress > tau) return Trend::Improving;
  if (*progress < -tau) return Trend::Degrading;
  return Trend::Plateauing;
}

TrendCounts count_trends(const StatsTracker::Snapshot& stats, double tau) {
  TrendCounts c;
  for (const auto& [id, s] : stats) {
    switch (classify_trend(s.progress, tau)) {
      case Trend::Improving: ++c.improving; break;
      case Trend::Plateauing: ++c.plateauing; break;
      case Trend::Degrading: ++c.degrading; break;
      case Trend::Undefined: break;
    }
  }
  return c;
}

std::vector<double> smooth(std::span<const double> series, double alpha) {
  if (series.empty()) throw Error("smooth: empty series");
  std::vector<double> out;
  out.reserve(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    // Written as x + alpha (prev - x) so constant series stay exactly constant.
    out.push_back(t == 0 ? series[0] : series[t] + alpha * (out.back() - series[t]));
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<StepRecord>& records,
               const nlohmann::json& meta) {
  if (!meta.is_null()) out << "# " << meta.dump() << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.epoch << ',' << r.step << ',' << fmt_double(r.mean_reward) << ','
        << fmt_double(r.mean_pass_rate) << ',' << fmt_double(r.w_min) << ','
        << fmt_double(r.w_mean) << ',' << fmt_double(r.w_max) << ',' << fmt_double(r.kl) << ','
        << fmt_double(r.active_ratio) << ',' << fmt_double(r.prefix_ratio) << ','
        << r.n_improving << ',' << r.n_plateauing << ',' << r.n_degrading << '\n';
  }
}

void write_jsonl(std::ostream& out, const std::vector<StepRecord>& records,
                 const nlohmann::json& meta) {
  if (!meta.is_null()) out << nlohmann::json{{"meta", meta}}.dump() << '\n';
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<StepRecord> read_jsonl(std::istream& in, nlohmann::json* meta) {
  std::vector<StepRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (j.contains("meta")) {
        if (meta) *meta = j["meta"];
        continue;
      }
      out.push_back(step_record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error("metrics line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void export_records(const std::vector<StepRecord>& records, const std::filesystem::path& path,
                    ExportFormat format, const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write metrics to " + path.string());
  if (format == ExportFormat::Csv) {
    write_csv(out, records, meta);
  } else {
    write_jsonl(out, records, meta);
  }
  if (!out) throw Error("error while writing metrics to " + path.string());
}

std::vector<StepRecord> load_records(const std::filesystem::path& path, nlohmann::json* meta) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metrics " + path.string());
  return read_jsonl(in, meta);
}

std::vector<StepRecord> smooth_records(const std::vector<StepRecord>& records, double alpha) {
  std::vector<StepRecord> out = records;
  if (records.empty()) return out;
  auto apply = [&](double StepRecord::*field) {
    std::vector<double> series;
    series.reserve(records.size());
    for (const auto& r : records) series.push_back(r.*field);
    auto s = smooth(series, alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].*field = s[i];
  };
  for (auto field : {&StepRecord::mean_reward, &StepRecord::mean_pass_rate, &StepRecord::w_min,
                     &StepRecord::w_mean, &StepRecord::w_max, &StepRecord::kl,
                     &StepRecord::active_ratio, &StepRecord::prefix_ratio}) {
    apply(field);
  }
  return out;
}

}  // namespace lppo
