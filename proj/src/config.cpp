#include "sdlps/config.hpp"

#include "sdlps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sdlps {

RunMode parse_run_mode(const std::string& name) {
    if (name == "approx-static") return RunMode::ApproxStatic;
    if (name == "sweep-static") return RunMode::SweepStatic;
    if (name == "solve-dynamic") return RunMode::SolveDynamic;
    if (name == "simulate-policy") return RunMode::SimulatePolicy;
    if (name == "reproduce-table1") return RunMode::ReproduceTable1;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string run_mode_name(RunMode mode) {
    switch (mode) {
    case RunMode::ApproxStatic: return "approx-static";
    case RunMode::SweepStatic: return "sweep-static";
    case RunMode::SolveDynamic: return "solve-dynamic";
    case RunMode::SimulatePolicy: return "simulate-policy";
    case RunMode::ReproduceTable1: return "reproduce-table1";
    }
    return "?";
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& name, int line, const std::string& key,
                 const std::string& val) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        fail(name, line, "field '" + key + "': not a number: '" + val + "'");
    }
}

std::uint64_t to_u64(const std::string& name, int line, const std::string& key,
                     const std::string& val) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        fail(name, line, "field '" + key + "': not a non-negative integer: '" + val + "'");
    }
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& name) {
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string text = raw.str();

    ExperimentConfig cfg;
    cfg.source_name = name;
    cfg.digest = fnv1a_hex(text);

    std::istringstream lines(text);
    std::string line_buf;
    std::string section;
    int line_no = 0;
    bool saw_mode = false, saw_lambda = false, saw_service = false;

    while (std::getline(lines, line_buf)) {
        ++line_no;
        std::string line = line_buf;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(name, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "service" && section != "input" &&
                section != "static" && section != "solver" && section != "sim" &&
                section != "output") {
                fail(name, line_no, "unknown section [" + section + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(name, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(name, line_no, "empty key");
        if (val.empty()) fail(name, line_no, "field '" + key + "': empty value");

        if (section == "experiment") {
            if (key == "mode") {
                try {
                    cfg.mode = parse_run_mode(val);
                } catch (const ConfigError& e) {
                    fail(name, line_no, e.what());
                }
                saw_mode = true;
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [experiment]");
            }
        } else if (section == "service") {
            if (key == "curve") {
                std::istringstream vs(val);
                std::string kind;
                vs >> kind;
                if (kind == "quadratic") {
                    if (!(vs >> cfg.quad_a >> cfg.quad_b)) {
                        fail(name, line_no, "curve: expected 'quadratic a b'");
                    }
                    cfg.quadratic = true;
                } else {
                    fail(name, line_no, "unknown curve form '" + kind + "'");
                }
                saw_service = true;
            } else if (key == "rates") {
                std::istringstream vs(val);
                double r;
                cfg.rates.clear();
                while (vs >> r) cfg.rates.push_back(r);
                if (cfg.rates.empty() || !vs.eof()) {
                    fail(name, line_no, "rates: expected a list of numbers");
                }
                saw_service = true;
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [service]");
            }
        } else if (section == "input") {
            if (key == "lambda") {
                cfg.lambda = to_double(name, line_no, key, val);
                saw_lambda = true;
            } else if (key == "arrival") {
                try {
                    cfg.arrival_family = parse_dist_family(val);
                } catch (const ValidationError& e) {
                    fail(name, line_no, std::string("field 'arrival': ") + e.what());
                }
            } else if (key == "ca2") {
                cfg.ca2 = to_double(name, line_no, key, val);
            } else if (key == "jobsize") {
                try {
                    cfg.jobsize_family = parse_dist_family(val);
                } catch (const ValidationError& e) {
                    fail(name, line_no, std::string("field 'jobsize': ") + e.what());
                }
            } else if (key == "m") {
                cfg.m = to_double(name, line_no, key, val);
            } else if (key == "cs2") {
                cfg.cs2 = to_double(name, line_no, key, val);
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [input]");
            }
        } else if (section == "static") {
            if (key == "K_range") {
                std::istringstream vs(val);
                int k;
                cfg.K_range.clear();
                while (vs >> k) cfg.K_range.push_back(k);
                if (cfg.K_range.empty() || !vs.eof()) {
                    fail(name, line_no, "K_range: expected a list of integers");
                }
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [static]");
            }
        } else if (section == "solver") {
            if (key == "method") {
                if (val != "newton" && val != "binary-search") {
                    fail(name, line_no, "method must be 'newton' or 'binary-search'");
                }
                cfg.method = val;
            } else if (key == "eps") {
                cfg.eps = to_double(name, line_no, key, val);
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [solver]");
            }
        } else if (section == "sim") {
            if (key == "seed") {
                cfg.seed = to_u64(name, line_no, key, val);
            } else if (key == "horizon") {
                cfg.horizon = to_u64(name, line_no, key, val);
            } else if (key == "warmup") {
                cfg.warmup = to_double(name, line_no, key, val);
            } else if (key == "batches") {
                cfg.batches = static_cast<int>(to_u64(name, line_no, key, val));
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [sim]");
            }
        } else if (section == "output") {
            if (key == "dir") {
                cfg.output_dir = val;
            } else if (key == "policy_file") {
                cfg.policy_file = val;
            } else {
                fail(name, line_no, "unknown key '" + key + "' in [output]");
            }
        } else {
            fail(name, line_no, "key '" + key + "' outside any section");
        }
    }

    if (!saw_mode) throw ConfigError(name + ": missing [experiment] mode");
    if (cfg.mode != RunMode::ReproduceTable1) {
        if (!saw_service) throw ConfigError(name + ": missing [service] curve or rates");
        if (!saw_lambda) throw ConfigError(name + ": missing [input] lambda");
    }
    if ((cfg.mode == RunMode::ApproxStatic || cfg.mode == RunMode::SweepStatic) &&
        cfg.K_range.empty()) {
        throw ConfigError(name + ": mode " + run_mode_name(cfg.mode) +
                          " requires a non-empty [static] K_range");
    }
    if (cfg.mode == RunMode::SimulatePolicy && cfg.policy_file.empty()) {
        throw ConfigError(name + ": mode simulate-policy requires [output] policy_file");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

ServiceRateCurve curve_from_config(const ExperimentConfig& cfg) {
    if (cfg.quadratic) return ServiceRateCurve::quadratic(cfg.quad_a, cfg.quad_b);
    if (cfg.rates.empty()) throw ConfigError("no service curve configured");
    return ServiceRateCurve::from_rates(cfg.rates);
}

InputProcess input_from_config(const ExperimentConfig& cfg) {
    return InputProcess::make(cfg.lambda, cfg.arrival_family, cfg.ca2,
                              cfg.jobsize_family, cfg.m, cfg.cs2);
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> findings;
    if (cfg.mode == RunMode::ReproduceTable1) return findings;
    try {
        (void)input_from_config(cfg);
    } catch (const std::exception& e) {
        findings.push_back(std::string("input process: ") + e.what());
    }
    try {
        const ServiceRateCurve curve = curve_from_config(cfg);
        const double rho = cfg.lambda * cfg.m;
        if (rho >= curve.max_rate()) {
            findings.push_back("unstabilizable: lambda*m = " + std::to_string(rho) +
                               " >= max mu = " + std::to_string(curve.max_rate()));
        }
        for (int K : cfg.K_range) {
            if (K < 1) {
                findings.push_back("K_range contains K = " + std::to_string(K) + " < 1");
            } else if (rho >= curve.mu(K)) {
                findings.push_back("static K = " + std::to_string(K) +
                                   " unstable: lambda*m = " + std::to_string(rho) +
                                   " >= mu(K) = " + std::to_string(curve.mu(K)));
            }
        }
    } catch (const std::exception& e) {
        findings.push_back(std::string("service curve: ") + e.what());
    }
    return findings;
}

} // namespace sdlps
