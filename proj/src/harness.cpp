#include "sop/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <json.hpp>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "sop/errors.hpp"
#include "sop/kernels.hpp"
#include "sop/mocks.hpp"
#include "sop/rng.hpp"
#include "sop/world_io.hpp"
#include "sop/worldgen.hpp"

namespace sop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Salts for seeds derived from a world seed.
constexpr std::uint64_t kBudgetSalt = 0xB0D6E7;
constexpr std::uint64_t kSchemeSalt = 0x5C4E3E;
constexpr std::uint64_t kMockSalt = 0x30C4;

std::string trial_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial_%04d", index);
    return buf;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

template <typename T>
T field(const json& obj, const char* key, const std::string& path, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + key, "has the wrong type");
    }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "config" : path.substr(0, path.size() - 1),
                                            "must be an object");
    for (const auto& [key, _] : obj.items())
        if (!known.count(key)) throw ConfigError(path + key, "unknown setting");
}

}  // namespace

void RunConfig::validate() const {
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
    if (dimension != 3)
        throw ConfigError("dimension", "agent prompts describe f(x,y), so runs need dimension 3");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("relaxation", "must be in (0, 1]");
    if (pinned_budget && *pinned_budget < 1) throw ConfigError("budget", "must be >= 1");
    if (endpoint.empty()) throw ConfigError("endpoint", "must not be empty");
    const bool live = endpoint == "http" || endpoint.rfind("record:", 0) == 0;
    if (!live && endpoint.rfind("mock:", 0) != 0 && endpoint.rfind("replay:", 0) != 0)
        throw ConfigError("endpoint", "expected mock:, replay:, record: or http, got '" + endpoint + "'");
    if (live) http.validate();
    if (sandbox != "stub" && sandbox.rfind("process:", 0) != 0)
        throw ConfigError("sandbox", "expected stub or process:<command>");
    scheme.validate();
    expert.validate(dimension);
}

std::string RunConfig::to_json() const {
    json doc{
        {"level", to_string(level)},
        {"trials", trials},
        {"master_seed", master_seed},
        {"fixed_world", fixed_world},
        {"dimension", dimension},
        {"relaxation", relaxation},
        {"budget", pinned_budget ? json(*pinned_budget) : json(nullptr)},
        {"endpoint", endpoint},
        {"sandbox", sandbox},
        {"scheme",
         {{"kind", to_string(scheme.kind)},
          {"agents", scheme.agent_count},
          {"max_rounds", scheme.max_rounds},
          {"parse_retries", scheme.parse_retries},
          {"abort_after_consecutive_failures", scheme.abort_after_consecutive_failures},
          {"exec_timeout_ms", scheme.exec_timeout_ms},
          {"exec_memory_mb", scheme.exec_memory_mb},
          {"exec_max_points", scheme.exec_max_points}}},
        {"expert",
         {{"initial_samples", expert.initial_samples},
          {"batch_size", expert.batch_size},
          {"candidate_pool", expert.candidate_pool},
          {"explore_fraction", expert.explore_fraction},
          {"max_queries", expert.max_queries},
          {"repeats", expert.repeats},
          {"reliability_quantile", expert.reliability_quantile},
          {"kernel_lengthscale_rule", "median"},
          {"jitter", expert.jitter},
          {"min_distance_fraction", expert.min_distance_fraction}}},
        {"http",
         {{"base_url", http.base_url},
          {"model", http.model_name},
          {"temperature", http.temperature},
          {"max_reply_tokens", http.max_reply_tokens},
          {"request_timeout_ms", http.request_timeout.count()},
          {"max_retries", http.max_retries},
          {"max_inflight", http.max_inflight},
          {"api_key_env", http.api_key_env}}},
    };
    return doc.dump(2) + "\n";
}

RunConfig RunConfig::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    reject_unknown(doc,
                   {"level", "trials", "master_seed", "fixed_world", "dimension", "relaxation", "budget",
                    "endpoint", "sandbox", "scheme", "expert", "http", "output_dir", "parallelism"},
                   "");
    RunConfig c;
    if (doc.contains("level")) c.level = parse_level(field<std::string>(doc, "level", "", ""));
    c.trials = field(doc, "trials", "", c.trials);
    c.master_seed = field(doc, "master_seed", "", c.master_seed);
    c.fixed_world = field(doc, "fixed_world", "", c.fixed_world);
    c.dimension = field(doc, "dimension", "", c.dimension);
    c.relaxation = field(doc, "relaxation", "", c.relaxation);
    if (doc.contains("budget") && !doc["budget"].is_null()) c.pinned_budget = field(doc, "budget", "", 0);
    c.endpoint = field(doc, "endpoint", "", c.endpoint);
    c.sandbox = field(doc, "sandbox", "", c.sandbox);
    c.output_dir = field<std::string>(doc, "output_dir", "", c.output_dir.string());
    c.parallelism = field(doc, "parallelism", "", c.parallelism);

    if (doc.contains("scheme")) {
        const auto& s = doc["scheme"];
        reject_unknown(s,
                       {"kind", "agents", "max_rounds", "parse_retries", "abort_after_consecutive_failures",
                        "exec_timeout_ms", "exec_memory_mb", "exec_max_points"},
                       "scheme.");
        if (s.contains("kind")) c.scheme = SchemeConfig::of(parse_scheme_kind(field<std::string>(s, "kind", "scheme.", "")));
        c.scheme.agent_count = field(s, "agents", "scheme.", c.scheme.agent_count);
        c.scheme.max_rounds = field(s, "max_rounds", "scheme.", c.scheme.max_rounds);
        c.scheme.parse_retries = field(s, "parse_retries", "scheme.", c.scheme.parse_retries);
        c.scheme.abort_after_consecutive_failures =
            field(s, "abort_after_consecutive_failures", "scheme.", c.scheme.abort_after_consecutive_failures);
        c.scheme.exec_timeout_ms = field(s, "exec_timeout_ms", "scheme.", c.scheme.exec_timeout_ms);
        c.scheme.exec_memory_mb = field(s, "exec_memory_mb", "scheme.", c.scheme.exec_memory_mb);
        c.scheme.exec_max_points = field(s, "exec_max_points", "scheme.", c.scheme.exec_max_points);
    }
    if (doc.contains("expert")) {
        const auto& e = doc["expert"];
        reject_unknown(e,
                       {"initial_samples", "batch_size", "candidate_pool", "explore_fraction", "max_queries",
                        "repeats", "reliability_quantile", "kernel_lengthscale_rule", "jitter",
                        "min_distance_fraction"},
                       "expert.");
        auto& x = c.expert;
        x.initial_samples = field(e, "initial_samples", "expert.", x.initial_samples);
        x.batch_size = field(e, "batch_size", "expert.", x.batch_size);
        x.candidate_pool = field(e, "candidate_pool", "expert.", x.candidate_pool);
        x.explore_fraction = field(e, "explore_fraction", "expert.", x.explore_fraction);
        x.max_queries = field(e, "max_queries", "expert.", x.max_queries);
        x.repeats = field(e, "repeats", "expert.", x.repeats);
        x.reliability_quantile = field(e, "reliability_quantile", "expert.", x.reliability_quantile);
        x.jitter = field(e, "jitter", "expert.", x.jitter);
        x.min_distance_fraction = field(e, "min_distance_fraction", "expert.", x.min_distance_fraction);
        if (field<std::string>(e, "kernel_lengthscale_rule", "expert.", "median") != "median")
            throw ConfigError("expert.kernel_lengthscale_rule", "only \"median\" is supported");
    }
    if (doc.contains("http")) {
        const auto& h = doc["http"];
        reject_unknown(h,
                       {"base_url", "model", "temperature", "max_reply_tokens", "request_timeout_ms",
                        "max_retries", "max_inflight", "api_key_env"},
                       "http.");
        auto& x = c.http;
        x.base_url = field(h, "base_url", "http.", x.base_url);
        x.model_name = field(h, "model", "http.", x.model_name);
        x.temperature = field(h, "temperature", "http.", x.temperature);
        x.max_reply_tokens = field(h, "max_reply_tokens", "http.", x.max_reply_tokens);
        x.request_timeout = std::chrono::milliseconds(
            field<std::int64_t>(h, "request_timeout_ms", "http.", x.request_timeout.count()));
        x.max_retries = field(h, "max_retries", "http.", x.max_retries);
        x.max_inflight = field(h, "max_inflight", "http.", x.max_inflight);
        x.api_key_env = field(h, "api_key_env", "http.", x.api_key_env);
    }
    return c;
}

std::string trial_record_to_json(const TrialRecord& r) {
    json doc{{"index", r.index},
             {"world_seed", r.world_seed},
             {"world_file", r.world_file},
             {"transcript_file", r.transcript_file},
             {"budget", r.budget},
             {"budget_reliable", r.budget_reliable},
             {"status", to_string(r.status)},
             {"queries_used", r.queries_used},
             {"best_value", r.best_value ? json(*r.best_value) : json(nullptr)},
             {"global_max", r.global_max},
             {"rounds", r.rounds},
             {"usage",
              {{"prompt_tokens", r.usage.prompt_tokens},
               {"completion_tokens", r.usage.completion_tokens},
               {"estimated", r.usage.estimated}}},
             {"abort_reason", r.abort_reason}};
    return doc.dump(2) + "\n";
}

TrialRecord trial_record_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        TrialRecord r;
        r.index = doc.at("index").get<int>();
        r.world_seed = doc.at("world_seed").get<std::uint64_t>();
        r.world_file = doc.at("world_file").get<std::string>();
        r.transcript_file = doc.at("transcript_file").get<std::string>();
        r.budget = doc.at("budget").get<int>();
        r.budget_reliable = doc.at("budget_reliable").get<bool>();
        r.status = parse_session_status(doc.at("status").get<std::string>());
        r.queries_used = doc.at("queries_used").get<int>();
        if (!doc.at("best_value").is_null()) r.best_value = doc.at("best_value").get<double>();
        r.global_max = doc.at("global_max").get<double>();
        r.rounds = doc.at("rounds").get<int>();
        const auto& u = doc.at("usage");
        r.usage = {u.at("prompt_tokens").get<std::int64_t>(), u.at("completion_tokens").get<std::int64_t>(),
                   u.at("estimated").get<bool>()};
        r.abort_reason = doc.at("abort_reason").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError("record", std::string("malformed trial record: ") + e.what());
    }
}

std::uint64_t trial_world_seed(const RunConfig& config, int index) {
    return config.fixed_world ? config.master_seed
                              : derive_seed(config.master_seed, static_cast<std::uint64_t>(index));
}

namespace {

std::vector<std::string> split_command(const std::string& command) {
    std::istringstream in(command);
    std::vector<std::string> out;
    for (std::string word; in >> word;) out.push_back(word);
    return out;
}

std::unique_ptr<SandboxClient> make_sandbox(const RunConfig& config) {
    if (config.sandbox == "stub") return std::make_unique<StubSandboxClient>();
    return std::make_unique<ProcessSandboxClient>(split_command(config.sandbox.substr(8)));
}

std::shared_ptr<ChatEndpoint> make_endpoint(const RunConfig& config, const Session& session,
                                            std::uint64_t seed, const std::shared_ptr<ChatEndpoint>& live) {
    const std::string& spec = config.endpoint;
    if (live) return live;
    if (spec.rfind("replay:", 0) == 0) return std::make_shared<ReplayEndpoint>(spec.substr(7));
    const std::string target = spec.substr(5);
    if (!fs::exists(target)) {
        if (auto policy = parse_mock_policy(target)) return make_policy_endpoint(*policy, session, seed);
        throw ConfigError("endpoint", "no mock policy or script named '" + target + "'");
    }
    std::vector<std::string> replies;
    try {
        replies = json::parse(read_file(target)).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError("endpoint", "mock script '" + target + "' must be a JSON array of strings");
    }
    return std::make_shared<ScriptedEndpoint>(std::move(replies));
}

TrialRecord run_one(const RunConfig& config, int index, const std::shared_ptr<ChatEndpoint>& live) {
    const fs::path& dir = config.output_dir;
    const std::string name = trial_name(index);
    TrialRecord rec;
    rec.index = index;
    rec.world_seed = trial_world_seed(config, index);
    rec.world_file = "worlds/" + name + ".json";
    rec.transcript_file = "transcripts/" + name + ".jsonl";

    GeneratedWorld gw;
    if (fs::exists(dir / rec.world_file)) {
        gw = load_world(dir / rec.world_file);
    } else {
        GenerationOptions opts;
        opts.policy = ExecPolicy::Serial;
        gw = generate_world(config.level, rec.world_seed, config.dimension, {}, opts);
        save_world(dir / rec.world_file, gw);
    }

    const fs::path budget_file = dir / "budgets" / (name + ".json");
    if (config.pinned_budget) {
        rec.budget = *config.pinned_budget;
        rec.budget_reliable = true;
    } else if (fs::exists(budget_file)) {
        const auto b = budget_from_json(read_file(budget_file));
        rec.budget = b.budget;
        rec.budget_reliable = b.reliable;
    } else {
        ExpertConfig ec = config.expert;
        ec.policy = ExecPolicy::Serial;
        const auto b = estimate_budget(gw.world, gw.analysis, ec, derive_seed(rec.world_seed, kBudgetSalt));
        write_file_atomic(budget_file, budget_to_json(b));
        rec.budget = b.budget;
        rec.budget_reliable = b.reliable;
    }

    auto world = std::make_shared<const WorldSpec>(gw.world);
    auto analysis = std::make_shared<const WorldAnalysis>(gw.analysis);
    Session session = open_session(world, analysis, rec.budget, config.relaxation);
    const std::uint64_t trial_seed = derive_seed(rec.world_seed, kSchemeSalt);
    auto endpoint = make_endpoint(config, session, derive_seed(trial_seed, kMockSalt), live);
    auto sandbox = make_sandbox(config);
    const Transcript transcript = run_scheme(config.scheme, session, *endpoint, *sandbox, trial_seed);
    write_file_atomic(dir / rec.transcript_file, transcript_jsonl(transcript));

    rec.status = session.status();
    rec.queries_used = session.queries_used();
    rec.best_value = session.best_value();
    rec.global_max = gw.analysis.global_max;
    rec.rounds = session.rounds_completed();
    rec.usage = count_usage(transcript);
    rec.abort_reason = session.abort_reason();
    return rec;
}

}  // namespace

std::vector<TrialRecord> run_trials(const RunConfig& config) {
    config.validate();
    const fs::path& dir = config.output_dir;
    fs::create_directories(dir);
    const std::string snapshot = config.to_json();
    const fs::path config_file = dir / "config.json";
    if (fs::exists(config_file)) {
        if (read_file(config_file) != snapshot)
            throw ConfigError("output_dir", "'" + dir.string() + "' holds a run with a different configuration");
    } else {
        write_file_atomic(config_file, snapshot);
    }

    std::shared_ptr<ChatEndpoint> live;
    if (config.endpoint == "http") {
        live = std::make_shared<HttpChatEndpoint>(config.http);
    } else if (config.endpoint.rfind("record:", 0) == 0) {
        live = std::make_shared<RecordingEndpoint>(std::make_shared<HttpChatEndpoint>(config.http),
                                                   config.endpoint.substr(7));
    }

    std::vector<TrialRecord> records(config.trials);
    std::vector<int> pending;
    for (int i = 0; i < config.trials; ++i) {
        const fs::path file = dir / "records" / (trial_name(i) + ".json");
        if (fs::exists(file)) {
            records[i] = trial_record_from_json(read_file(file));
        } else {
            pending.push_back(i);
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    const auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            {
                std::lock_guard lock(failure_mu);
                if (failure) return;
            }
            const int i = pending[k];
            try {
                TrialRecord rec = run_one(config, i, live);
                // The record is written last: its presence marks the trial complete.
                write_file_atomic(dir / "records" / (trial_name(i) + ".json"), trial_record_to_json(rec));
                records[i] = std::move(rec);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = std::min<int>(config.parallelism, static_cast<int>(pending.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return records;
}

std::pair<double, double> wilson_interval(int successes, int trials) {
    if (trials <= 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = trials, p = successes / n;
    const double denom = 1 + z * z / n;
    const double centre = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

std::vector<TrialRecord> load_records(const fs::path& run_dir) {
    const fs::path dir = run_dir / "records";
    if (!fs::is_directory(dir)) throw ConfigError("run_dir", "'" + run_dir.string() + "' has no records");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<TrialRecord> records;
    for (const auto& f : files) records.push_back(trial_record_from_json(read_file(f)));
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return records;
}

double mean_total(const std::vector<TrialRecord>& rows) {
    if (rows.empty()) return 0.0;
    double s = 0;
    for (const auto& r : rows) s += static_cast<double>(r.usage.total());
    return s / static_cast<double>(rows.size());
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

Report build_report(const fs::path& run_dir, const std::optional<fs::path>& baseline) {
    Report rep;
    rep.rows = load_records(run_dir);
    if (fs::exists(run_dir / "config.json")) {
        const json cfg = json::parse(read_file(run_dir / "config.json"));
        rep.scheme = cfg.at("scheme").at("kind").get<std::string>();
        rep.level = cfg.at("level").get<std::string>();
    }
    rep.trials = static_cast<int>(rep.rows.size());
    double prompt = 0, completion = 0;
    for (const auto& r : rep.rows) {
        if (r.status == SessionStatus::Succeeded) ++rep.succeeded;
        prompt += static_cast<double>(r.usage.prompt_tokens);
        completion += static_cast<double>(r.usage.completion_tokens);
        rep.usage_estimated = rep.usage_estimated || r.usage.estimated;
    }
    if (rep.trials > 0) {
        rep.success_rate = static_cast<double>(rep.succeeded) / rep.trials;
        rep.mean_prompt_tokens = prompt / rep.trials;
        rep.mean_completion_tokens = completion / rep.trials;
        rep.mean_total_tokens = (prompt + completion) / rep.trials;
    }
    std::tie(rep.wilson_lo, rep.wilson_hi) = wilson_interval(rep.succeeded, rep.trials);

    if (baseline) {
        const auto base = load_records(*baseline);
        const double base_mean = mean_total(base);
        if (base_mean <= 0) throw ConfigError("baseline", "baseline run has no token usage");
        Normalization n;
        n.baseline = baseline->filename().string();
        if (n.baseline.empty()) n.baseline = baseline->parent_path().filename().string();
        n.ratio_of_means = round2(rep.mean_total_tokens / base_mean);
        double sum = 0;
        for (const auto& r : rep.rows)
            for (const auto& b : base)
                if (b.index == r.index && b.usage.total() > 0) {
                    sum += static_cast<double>(r.usage.total()) / static_cast<double>(b.usage.total());
                    ++n.paired_trials;
                }
        n.mean_of_ratios = n.paired_trials > 0 ? round2(sum / n.paired_trials) : 0.0;
        rep.normalized = n;
    }
    return rep;
}

std::string report_json(const Report& rep) {
    json doc{{"scheme", rep.scheme},
             {"level", rep.level},
             {"trials", rep.trials},
             {"succeeded", rep.succeeded},
             {"success_rate", rep.success_rate},
             {"wilson_95", {rep.wilson_lo, rep.wilson_hi}},
             {"mean_usage",
              {{"prompt_tokens", rep.mean_prompt_tokens},
               {"completion_tokens", rep.mean_completion_tokens},
               {"total_tokens", rep.mean_total_tokens},
               {"estimated", rep.usage_estimated}}}};
    if (rep.normalized)
        doc["normalized_cost"] = {{"baseline", rep.normalized->baseline},
                                  {"ratio_of_means", rep.normalized->ratio_of_means},
                                  {"mean_of_ratios", rep.normalized->mean_of_ratios},
                                  {"paired_trials", rep.normalized->paired_trials}};
    return doc.dump(2) + "\n";
}

std::string report_csv(const Report& rep) {
    std::string out =
        "trial,world_seed,budget,status,queries_used,best_value,global_max,rounds,prompt_tokens,"
        "completion_tokens,total_tokens,estimated\n";
    for (const auto& r : rep.rows) {
        out += std::to_string(r.index) + "," + std::to_string(r.world_seed) + "," + std::to_string(r.budget) +
               "," + std::string(to_string(r.status)) + "," + std::to_string(r.queries_used) + "," +
               (r.best_value ? num(*r.best_value) : std::string()) + "," + num(r.global_max) + "," +
               std::to_string(r.rounds) + "," + std::to_string(r.usage.prompt_tokens) + "," +
               std::to_string(r.usage.completion_tokens) + "," + std::to_string(r.usage.total()) + "," +
               (r.usage.estimated ? "true" : "false") + "\n";
    }
    return out;
}

std::string report_table(const Report& rep) {
    char buf[512];
    std::string out;
    std::snprintf(buf, sizeof buf, "scheme %s, level %s\n", rep.scheme.c_str(), rep.level.c_str());
    out += buf;
    std::snprintf(buf, sizeof buf, "success  %d/%d = %.2f  (95%% Wilson %.2f-%.2f)\n", rep.succeeded,
                  rep.trials, rep.success_rate, rep.wilson_lo, rep.wilson_hi);
    out += buf;
    std::snprintf(buf, sizeof buf, "tokens   prompt %.1f  completion %.1f  total %.1f%s\n",
                  rep.mean_prompt_tokens, rep.mean_completion_tokens, rep.mean_total_tokens,
                  rep.usage_estimated ? "  (estimated)" : "");
    out += buf;
    if (rep.normalized) {
        std::snprintf(buf, sizeof buf, "vs %s  ratio of means %.2f  mean of ratios %.2f  (%d paired)\n",
                      rep.normalized->baseline.c_str(), rep.normalized->ratio_of_means,
                      rep.normalized->mean_of_ratios, rep.normalized->paired_trials);
        out += buf;
    }
    return out;
}

void write_report(const fs::path& run_dir, const Report& report) {
    write_file_atomic(run_dir / "report.json", report_json(report));
    write_file_atomic(run_dir / "report.csv", report_csv(report));
}

std::string export_heatmap_csv(const WorldSpec& world, int resolution) {
    if (world.dimension != 3)
        throw UnsupportedDimension("heatmaps need a 3-dimensional world, got dimension " +
                                   std::to_string(world.dimension));
    if (resolution < 2) throw ConfigError("resolution", "must be >= 2");
    const kernels::Grid grid(world.bounds, resolution);
    const auto values = kernels::grid_values(world, grid, ExecPolicy::Parallel);
    std::string out = "x,y,f\n";
    char buf[128];
    for (std::size_t k = 0; k < values.size(); ++k) {
        const Point p = grid.node(k);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0], p[1], values[k]);
        out += buf;
    }
    return out;
}

}  // namespace sop
