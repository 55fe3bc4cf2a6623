// harness.cpp — run configuration, report rendering, and replica scheduling.
#include "gffnet/harness.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gffnet/errors.hpp"

namespace gffnet {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* kind_name(Assertion::Kind kind) {
    switch (kind) {
        case Assertion::Kind::Hard: return "hard";
        case Assertion::Kind::Statistical: return "statistical";
        case Assertion::Kind::Soft: return "soft";
    }
    return "unknown";
}

}  // namespace

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = extra.find(key);
    return it == extra.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = extra.find(key);
    if (it == extra.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a real number: " + it->second);
    }
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
    const auto it = extra.find(key);
    if (it == extra.end()) return fallback;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
    }
}

void RunConfig::validate() const {
    if (experiment.empty()) throw ConfigError("no experiment selected");
    if (replicas < 1) throw ConfigError("replicas must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (tol < 0.0) throw ConfigError("tol must be >= 0");
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << line_no << ": expected key=value";
            throw ConfigError(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << path << ":" << line_no << ": empty key";
            throw ConfigError(os.str());
        }
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "replicas") {
            cfg.replicas = static_cast<int>(std::stoll(value));
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(std::stoll(value));
        } else if (key == "tol") {
            cfg.tol = std::stod(value);
        } else if (key == "out") {
            cfg.out_dir = value;
        } else {
            cfg.extra[key] = value;
        }
    }
}

bool RunResult::passed() const {
    for (const Assertion& a : assertions) {
        if (a.kind == Assertion::Kind::Hard && !a.pass) return false;
    }
    return true;
}

bool RunResult::fully_passed() const {
    for (const Assertion& a : assertions) {
        if (!a.pass) return false;
    }
    return true;
}

RunResult run_experiment(const RunConfig& cfg) {
    cfg.validate();
    const auto& registry = experiment_registry();
    const auto it = registry.find(cfg.experiment);
    if (it == registry.end()) {
        std::string known;
        for (const auto& [name, fn] : registry) {
            if (!known.empty()) known += ", ";
            known += name;
        }
        throw ConfigError("unknown experiment '" + cfg.experiment + "' (known: " + known + ")");
    }
    RunResult result = it->second(cfg);
    result.experiment = cfg.experiment;
    return result;
}

std::string render_csv(const std::vector<CsvRow>& rows) {
    std::string out = "experiment,n,zeta,gamma,replica,stat,value,seed\n";
    for (const CsvRow& r : rows) {
        out += r.experiment;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.zeta);
        out += ',';
        out += format_double(r.gamma);
        out += ',';
        out += std::to_string(r.replica);
        out += ',';
        out += r.stat;
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::string render_report_json(const RunConfig& cfg, const RunResult& result) {
    nlohmann::json j;
    j["experiment"] = result.experiment;
    j["config"]["seed"] = cfg.seed;
    j["config"]["replicas"] = cfg.replicas;
    j["config"]["threads"] = cfg.threads;
    j["config"]["tol"] = cfg.tol;
    j["config"]["options"] = cfg.extra;

    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [name, value] : result.summary) summary[name] = value;
    j["summary"] = summary;

    nlohmann::json assertions = nlohmann::json::array();
    for (const Assertion& a : result.assertions) {
        nlohmann::json ja;
        ja["name"] = a.name;
        ja["kind"] = kind_name(a.kind);
        ja["pass"] = a.pass;
        ja["value"] = a.value;
        ja["bound"] = a.bound;
        ja["detail"] = a.detail;
        assertions.push_back(ja);
    }
    j["assertions"] = assertions;
    j["passed"] = result.passed();
    j["environment"]["library"] = "gffnet";
    j["environment"]["report_format"] = 1;
    return j.dump(2) + "\n";
}

void write_outputs(const RunConfig& cfg, const RunResult& result) {
    if (cfg.out_dir.empty()) return;
    const std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

    auto write_file = [&](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << body;
    };
    write_file(dir / "report.json", render_report_json(cfg, result));
    write_file(dir / "detail.csv", render_csv(result.rows));
    for (const auto& [name, body] : result.tables) {
        write_file(dir / (name + ".dat"), body);
    }
}

void parallel_replicas(int replicas, int threads, const std::function<void(int)>& fn) {
    if (replicas <= 0) return;
    const int workers = std::max(1, std::min(threads, replicas));
    if (workers == 1) {
        for (int r = 0; r < replicas; ++r) fn(r);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const int r = next.fetch_add(1, std::memory_order_relaxed);
            if (r >= replicas) break;
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gffnet
