#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rescrb/errors.hpp"
#include "rescrb/mc_harness.hpp"

namespace rescrb::mc {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string item;
    for (char c : value) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!item.empty()) items.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) items.push_back(item);
    return items;
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw InvalidInput("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text.front() != '-') v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw InvalidInput("config: '" + key + "' expects a non-negative integer, got '" + text +
                           "'");
    }
    return v;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
    std::vector<double> values;
    for (const auto& item : split_list(text)) values.push_back(parse_double(key, item));
    if (values.empty()) throw InvalidInput("config: '" + key + "' is empty");
    return values;
}

const std::set<std::string> kKnownKeys{"family", "shapes", "n",         "m",
                                       "rho",    "power",  "mu_fill",   "estimators",
                                       "huber_u", "runs",  "seed",      "tolerance",
                                       "max_iterations"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.contains(key)) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": unknown key '" + key +
                               "'");
        }
        if (!entries.emplace(key, value).second) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": duplicate key '" +
                               key + "'");
        }
    }

    ExperimentConfig cfg;
    auto get = [&](const char* key) -> const std::string* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("family")) cfg.family = parse_family(*v);
    cfg.shapes = default_shapes(cfg.family);
    if (const auto* v = get("shapes")) cfg.shapes = parse_doubles("shapes", *v);
    if (const auto* v = get("n")) cfg.n = parse_unsigned("n", *v);
    cfg.m = 3 * cfg.n;
    if (const auto* v = get("m")) cfg.m = parse_unsigned("m", *v);
    if (const auto* v = get("rho")) cfg.rho = parse_double("rho", *v);
    if (const auto* v = get("power")) cfg.sigma2 = parse_double("power", *v);
    if (const auto* v = get("mu_fill")) cfg.mu_fill = parse_double("mu_fill", *v);
    if (const auto* v = get("huber_u")) cfg.estimators.huber_u = parse_doubles("huber_u", *v);
    if (const auto* v = get("estimators")) {
        EstimatorSet set{false, false, false, {}};
        bool huber = false;
        for (const auto& name : split_list(*v)) {
            if (name == "sample_mean") {
                set.sample_mean = true;
            } else if (name == "cscm") {
                set.cscm = true;
            } else if (name == "tyler") {
                set.tyler = true;
            } else if (name == "huber") {
                huber = true;
            } else {
                throw InvalidInput("config: unknown estimator '" + name + "'");
            }
        }
        if (huber) set.huber_u = cfg.estimators.huber_u;
        cfg.estimators = set;
    }
    if (const auto* v = get("runs")) cfg.runs = parse_unsigned("runs", *v);
    if (const auto* v = get("seed")) cfg.seed = parse_unsigned("seed", *v);
    if (const auto* v = get("tolerance")) cfg.fixed_point.tolerance = parse_double("tolerance", *v);
    if (const auto* v = get("max_iterations")) {
        cfg.fixed_point.max_iterations = static_cast<int>(parse_unsigned("max_iterations", *v));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace rescrb::mc
