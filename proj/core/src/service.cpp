#include "lppo/service.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "lppo/error.hpp"
#include "lppo/rng.hpp"

namespace lppo {

namespace {

constexpr std::uint64_t kSaltServePrefix = 3;

nlohmann::json error_response(std::string message) { return {{"error", std::move(message)}}; }

std::string required_id(const nlohmann::json& request) {
  if (!request.contains("id") || !request["id"].is_string()) {
    throw Error("request needs a string \"id\"");
  }
  return request["id"].get<std::string>();
}

}  // namespace

SchedulerService::SchedulerService(RunConfig config, const std::vector<Problem>& problems,
                                   std::filesystem::path snapshot_path)
    : config_(std::move(config)),
      tracker_(config_.weighting),
      scheduler_(problems, config_.curation()),
      snapshot_path_(std::move(snapshot_path)) {
  for (const auto& p : problems) {
    if (p.expert_solution) solutions_.emplace(p.id, tokenize(*p.expert_solution));
    problems_.emplace(p.id, p);
  }
}

PrefixSpec SchedulerService::draw_prefix(const std::string& id) {
  Rng rng = substream(config_.seed, id, draws_++, kSaltServePrefix);
  const double lambda = draw_ratio(rng, config_.beta_min, config_.beta_max);
  return build_prefix(solutions_.at(id), lambda, config_.clip_mode);
}

nlohmann::json SchedulerService::report(const nlohmann::json& request) {
  const std::string id = required_id(request);
  auto it = problems_.find(id);
  if (it == problems_.end()) throw Error("unknown id \"" + id + "\"");
  if (!request.contains("pass_rate") || !request["pass_rate"].is_number()) {
    throw Error("report needs a numeric \"pass_rate\"");
  }
  const double rate = request["pass_rate"].get<double>();
  std::int64_t epoch = epoch_;
  if (request.contains("epoch")) {
    if (!request["epoch"].is_number_integer()) throw Error("\"epoch\" must be an integer");
    epoch = request["epoch"].get<std::int64_t>();
  }
  if (epoch < epoch_) {
    throw Error("epoch " + std::to_string(epoch) + " precedes current epoch " +
                std::to_string(epoch_));
  }
  while (epoch_ < epoch) {
    scheduler_.advance_epoch();
    ++epoch_;
  }

  tracker_.update_pass_rate(id, rate, epoch);
  const Disposition d = classify(rate, it->second.pool, config_.curation());
  const double weight = config_.weighting_enabled() ? tracker_.weight(id) : 1.0;
  if (d == Disposition::SkipAndRetire) {
    scheduler_.retire(id);
    tracker_.set_excluded(id, true);
  } else if (d == Disposition::QueuePrefix) {
    scheduler_.enqueue_prefix(id, draw_prefix(id));
  }
  return {{"id", id}, {"weight", weight}, {"disposition", to_string(d)}, {"epoch", epoch}};
}

nlohmann::json SchedulerService::prefix(const nlohmann::json& request) {
  const std::string id = required_id(request);
  auto it = problems_.find(id);
  if (it == problems_.end()) throw Error("unknown id \"" + id + "\"");
  if (it->second.pool != Pool::PrefixEligible) return error_response("no expert solution");

  // A prefix queued by an earlier report is handed out first.
  auto queued = scheduler_.take_queued(id);
  PrefixSpec spec = queued ? std::move(queued->prefix) : draw_prefix(id);
  return augment(it->second, spec).to_json();
}

nlohmann::json SchedulerService::snapshot() {
  std::ofstream out(snapshot_path_);
  if (!out) throw Error("cannot write snapshot " + snapshot_path_.string());
  nlohmann::json meta = {{"config_hash", config_.hash()}, {"epoch", epoch_}, {"config", config_.to_json()}};
  write_snapshot(out, tracker_.snapshot(), meta);
  if (!out) throw Error("error while writing snapshot " + snapshot_path_.string());
  return {{"path", snapshot_path_.string()}};
}

nlohmann::json SchedulerService::handle(const nlohmann::json& request) {
  try {
    if (!request.is_object() || !request.contains("op") || !request["op"].is_string()) {
      return error_response("request needs a string \"op\"");
    }
    const auto op = request["op"].get<std::string>();
    if (op == "report") return report(request);
    if (op == "prefix") return prefix(request);
    if (op == "snapshot") return snapshot();
    return error_response("unknown op \"" + op + "\"");
  } catch (const std::exception& e) {
    return error_response(e.what());
  }
}

std::string SchedulerService::handle_line(std::string_view line) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    return nlohmann::json{{"error", "unparseable request"}, {"line", std::string(line)}}.dump(
        -1, ' ', false, nlohmann::json::error_handler_t::replace);
  }
  return handle(request).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void serve_stream(SchedulerService& service, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << service.handle_line(line) << '\n';
    out.flush();
  }
}

}  // namespace lppo
