// Copyright 2026 The pema Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pema/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <type_traits>
#include <sstream>

#include "pema/harness/csv.hpp"

namespace pema::harness {

namespace pt = boost::property_tree;

namespace {

struct KindName {
    ExperimentKind kind;
    const char* id;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::Weights, "weights"},
    {ExperimentKind::BadWeights, "bad-weights"},
    {ExperimentKind::TrendComparison, "trend"},
    {ExperimentKind::JumpComparison, "jump"},
    {ExperimentKind::CounterexampleHighP, "high-p"},
    {ExperimentKind::CounterexampleLowP, "low-p"},
    {ExperimentKind::SgdSuggestedSteps, "sgd"},
    {ExperimentKind::TrendShift, "trend-shift"},
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(',', start);
        const auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) out.push_back(item);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& field, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        throw ConfigError(field, "expected a real number, got '" + text + "'");
    return v;
}

std::uint64_t to_uint(const std::string& field, const std::string& text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
    if (text == "false" || text == "no" || text == "0" || text == "off") return false;
    throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string linear_noise_name(sgd::LinearNoise n) { return n == sgd::LinearNoise::Sign ? "sign" : "uniform"; }

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"experiment", {"kind", "iters", "seeds", "output_dir", "svg", "unsafe_range"}},
        {"averagers", {"list"}},
        {"process",
         {"grid_lo", "grid_hi", "n_points", "noise_std", "hold_prefix", "q", "s", "forced_prefix", "worst_case"}},
        {"sgd",
         {"dim", "lambda_lo", "lambda_hi", "sigma_a", "sigma_b", "sop_seed", "alpha_factor", "l_samples",
          "linear_noise"}},
    };
    return keys;
}

std::vector<AveragerSpec> standard_trio() {
    return {AveragerSpec::arithmetic(), AveragerSpec::ema(0.99), AveragerSpec::pema(0.75)};
}

}  // namespace

std::string experiment_id(ExperimentKind kind) {
    for (const auto& k : kKindNames)
        if (k.kind == kind) return k.id;
    return "unknown";
}

ExperimentKind parse_experiment_id(std::string_view id) {
    for (const auto& k : kKindNames)
        if (id == k.id) return k.kind;
    std::string valid;
    for (const auto& k : kKindNames) valid += std::string(valid.empty() ? "" : ", ") + k.id;
    throw ConfigError("experiment.kind", "unknown experiment '" + std::string(id) + "' (valid: " + valid + ")");
}

const std::vector<ExperimentKind>& all_experiments() {
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (const auto& k : kKindNames) v.push_back(k.kind);
        return v;
    }();
    return kinds;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& item : split_list(text)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(to_uint("experiment.seeds", item));
            continue;
        }
        const auto lo = to_uint("experiment.seeds", trim(item.substr(0, dots)));
        const auto hi = to_uint("experiment.seeds", trim(item.substr(dots + 2)));
        if (hi < lo) throw ConfigError("experiment.seeds", "empty range '" + item + "'");
        if (hi - lo >= 1000000) throw ConfigError("experiment.seeds", "range '" + item + "' is too long");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw ConfigError("experiment.seeds", "at least one seed is required");
    return seeds;
}

void ExperimentConfig::validate() const {
    if (averagers.empty()) throw ConfigError("averagers.list", "at least one averager is required");
    for (const auto& a : averagers) {
        try {
            a.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("averagers.list", e.what());
        }
    }
    if (iters < 1) throw ConfigError("experiment.iters", "must be at least 1");
    if (seeds.empty()) throw ConfigError("experiment.seeds", "at least one seed is required");
    if (output_dir.empty()) throw ConfigError("experiment.output_dir", "must not be empty");

    if (!(trend.grid_lo < trend.grid_hi)) throw ConfigError("process.grid_lo", "must be below process.grid_hi");
    if (trend.n_points < 1) throw ConfigError("process.n_points", "must be at least 1");
    if (!(trend.noise_std >= 0.0) || !std::isfinite(trend.noise_std))
        throw ConfigError("process.noise_std", "must be finite and non-negative");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("process.q", "must lie in (0, 1)");
    if (!(s > 3.0) || !std::isfinite(s)) throw ConfigError("process.s", "must be finite and greater than 3");
    const bool trend_kind =
        experiment == ExperimentKind::TrendComparison || experiment == ExperimentKind::TrendShift;
    if (trend_kind && iters > trend.n_points + trend.hold_prefix)
        throw ConfigError("experiment.iters", "exceeds process.n_points + process.hold_prefix");

    if (problem.dim < 1) throw ConfigError("sgd.dim", "must be at least 1");
    if (!(problem.lambda_lo > 0.0)) throw ConfigError("sgd.lambda_lo", "must be positive");
    if (!(problem.lambda_hi >= problem.lambda_lo)) throw ConfigError("sgd.lambda_hi", "must be >= sgd.lambda_lo");
    if (!(problem.sigma_a >= 0.0)) throw ConfigError("sgd.sigma_a", "must be non-negative");
    if (!(problem.sigma_b >= 0.0)) throw ConfigError("sgd.sigma_b", "must be non-negative");
    if (!(alpha_factor > 0.0) || !std::isfinite(alpha_factor))
        throw ConfigError("sgd.alpha_factor", "must be finite and positive");
    if (l_samples < 1) throw ConfigError("sgd.l_samples", "must be at least 1");
    if (experiment == ExperimentKind::SgdSuggestedSteps && iters < 2)
        throw ConfigError("experiment.iters", "the SGD trace needs at least 2 iterations");
}

ExperimentConfig preset(ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    switch (kind) {
        case ExperimentKind::Weights:
            c.averagers = {AveragerSpec::pema(0.75), AveragerSpec::ema(0.9), AveragerSpec::arithmetic()};
            break;
        case ExperimentKind::BadWeights:
            c.unsafe_range = true;
            c.averagers = {AveragerSpec::pema(0.3, true), AveragerSpec::pema(0.5, true), AveragerSpec::pema(0.75, true),
                           AveragerSpec::pema(1.5, true)};
            break;
        case ExperimentKind::TrendComparison:
        case ExperimentKind::JumpComparison:
            c.averagers = standard_trio();
            break;
        case ExperimentKind::CounterexampleHighP:
            c.unsafe_range = true;
            c.averagers = {AveragerSpec::pema(1.5, true)};
            c.iters = 100000;
            c.worst_case = true;
            break;
        case ExperimentKind::CounterexampleLowP:
            c.unsafe_range = true;
            c.averagers = {AveragerSpec::pema(0.3, true)};
            c.iters = 100000;
            c.seeds.clear();
            for (std::uint64_t i = 1; i <= 20; ++i) c.seeds.push_back(i);
            break;
        case ExperimentKind::SgdSuggestedSteps:
            c.averagers = {AveragerSpec::pema(0.75), AveragerSpec::arithmetic(), AveragerSpec::ema(0.99)};
            c.iters = 50000;
            break;
        case ExperimentKind::TrendShift:
            c.averagers = standard_trio();
            c.iters = 50000;
            c.trend.hold_prefix = 40000;
            break;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text, ExperimentKind fallback) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", std::string("malformed file: ") + e.what());
    }

    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (body.empty()) throw ConfigError(section, "key outside of any section");
            throw ConfigError(section, "unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        const auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
        if (!v) return std::nullopt;
        return trim(*v);
    };

    ExperimentConfig c = preset(fallback);
    if (const auto v = get("experiment", "kind")) c = preset(parse_experiment_id(*v));

    const auto field = [](const char* s, const char* k) { return std::string(s) + "." + k; };
    const auto real = [&](const char* s, const char* k, double& dst) {
        if (const auto v = get(s, k)) dst = to_double(field(s, k), *v);
    };
    const auto uint = [&](const char* s, const char* k, auto& dst) {
        if (const auto v = get(s, k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_uint(field(s, k), *v));
    };
    const auto flag = [&](const char* s, const char* k, bool& dst) {
        if (const auto v = get(s, k)) dst = to_bool(field(s, k), *v);
    };

    uint("experiment", "iters", c.iters);
    if (const auto v = get("experiment", "seeds")) c.seeds = parse_seed_list(*v);
    if (const auto v = get("experiment", "output_dir")) c.output_dir = *v;
    flag("experiment", "svg", c.svg);
    const bool unsafe_given = get("experiment", "unsafe_range").has_value();
    flag("experiment", "unsafe_range", c.unsafe_range);

    if (const auto v = get("averagers", "list")) {
        c.averagers.clear();
        for (const auto& item : split_list(*v)) {
            try {
                c.averagers.push_back(AveragerSpec::parse(item, c.unsafe_range));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("averagers.list", e.what());
            }
        }
    } else if (unsafe_given) {
        for (auto& a : c.averagers) a.unsafe_range = c.unsafe_range;
    }

    real("process", "grid_lo", c.trend.grid_lo);
    real("process", "grid_hi", c.trend.grid_hi);
    uint("process", "n_points", c.trend.n_points);
    real("process", "noise_std", c.trend.noise_std);
    uint("process", "hold_prefix", c.trend.hold_prefix);
    real("process", "q", c.q);
    real("process", "s", c.s);
    uint("process", "forced_prefix", c.forced_prefix);
    flag("process", "worst_case", c.worst_case);

    uint("sgd", "dim", c.problem.dim);
    real("sgd", "lambda_lo", c.problem.lambda_lo);
    real("sgd", "lambda_hi", c.problem.lambda_hi);
    real("sgd", "sigma_a", c.problem.sigma_a);
    real("sgd", "sigma_b", c.problem.sigma_b);
    uint("sgd", "sop_seed", c.sop_seed);
    real("sgd", "alpha_factor", c.alpha_factor);
    uint("sgd", "l_samples", c.l_samples);
    if (const auto v = get("sgd", "linear_noise")) {
        if (*v == "uniform")
            c.linear_noise = sgd::LinearNoise::Uniform;
        else if (*v == "sign")
            c.linear_noise = sgd::LinearNoise::Sign;
        else
            throw ConfigError("sgd.linear_noise", "expected uniform or sign, got '" + *v + "'");
    }

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind fallback) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fallback);
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[experiment]\n";
    o << "kind = " << experiment_id(c.experiment) << '\n';
    o << "iters = " << c.iters << '\n';
    o << "seeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) o << (i ? "," : "") << c.seeds[i];
    o << '\n';
    o << "output_dir = " << c.output_dir.string() << '\n';
    o << "svg = " << bool_text(c.svg) << '\n';
    o << "unsafe_range = " << bool_text(c.unsafe_range) << '\n';
    o << "\n[averagers]\nlist = ";
    for (std::size_t i = 0; i < c.averagers.size(); ++i) o << (i ? ", " : "") << c.averagers[i].label();
    o << '\n';
    o << "\n[process]\n";
    o << "grid_lo = " << format_real(c.trend.grid_lo) << '\n';
    o << "grid_hi = " << format_real(c.trend.grid_hi) << '\n';
    o << "n_points = " << c.trend.n_points << '\n';
    o << "noise_std = " << format_real(c.trend.noise_std) << '\n';
    o << "hold_prefix = " << c.trend.hold_prefix << '\n';
    o << "q = " << format_real(c.q) << '\n';
    o << "s = " << format_real(c.s) << '\n';
    o << "forced_prefix = " << c.forced_prefix << '\n';
    o << "worst_case = " << bool_text(c.worst_case) << '\n';
    o << "\n[sgd]\n";
    o << "dim = " << c.problem.dim << '\n';
    o << "lambda_lo = " << format_real(c.problem.lambda_lo) << '\n';
    o << "lambda_hi = " << format_real(c.problem.lambda_hi) << '\n';
    o << "sigma_a = " << format_real(c.problem.sigma_a) << '\n';
    o << "sigma_b = " << format_real(c.problem.sigma_b) << '\n';
    o << "sop_seed = " << c.sop_seed << '\n';
    o << "alpha_factor = " << format_real(c.alpha_factor) << '\n';
    o << "l_samples = " << c.l_samples << '\n';
    o << "linear_noise = " << linear_noise_name(c.linear_noise) << '\n';
    return o.str();
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = to_ini(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream o;
    o << std::hex;
    o.width(16);
    o.fill('0');
    o << h;
    return o.str();
}

std::string config_reference() {
    const ExperimentConfig d;
    std::ostringstream o;
    o << "Config file keys (INI sections; unspecified keys take the experiment preset):\n"
      << "  [experiment]\n"
      << "    kind          weights | bad-weights | trend | jump | high-p | low-p | sgd | trend-shift\n"
      << "    iters         observations or SGD iterations per run (default " << d.iters << ")\n"
      << "    seeds         list such as 1,2,3 or 1..50 (default 1)\n"
      << "    output_dir    directory for CSV, SVG and manifest.json (default $PEMA_OUTPUT_DIR or "
      << d.output_dir.string() << ")\n"
      << "    svg           also write figure.svg (default true)\n"
      << "    unsafe_range  admit p-EMA exponents outside (0.5, 1] (default false)\n"
      << "  [averagers]\n"
      << "    list          comma-separated, e.g. pema-0.75, ema-0.99, arithmetic\n"
      << "  [process]\n"
      << "    grid_lo, grid_hi  trend grid bounds (default " << format_real(d.trend.grid_lo) << ", "
      << format_real(d.trend.grid_hi) << ")\n"
      << "    n_points      trend grid size (default " << d.trend.n_points << ")\n"
      << "    noise_std     Gaussian noise on the trend (default " << format_real(d.trend.noise_std) << ")\n"
      << "    hold_prefix   steps at the first grid value before the trend starts (default 0)\n"
      << "    q             jump process stay probability (default " << format_real(d.q) << ")\n"
      << "    s             heavy-tail exponent, > 3 (default " << format_real(d.s) << ")\n"
      << "    forced_prefix leading +1 signs in the high-p run (default " << d.forced_prefix << ")\n"
      << "    worst_case    emit -1 after the prefix instead of fair signs (default false)\n"
      << "  [sgd]\n"
      << "    dim           problem dimension (default " << d.problem.dim << ")\n"
      << "    lambda_lo, lambda_hi  log-spaced mean Hessian spectrum (default " << format_real(d.problem.lambda_lo)
      << ", " << format_real(d.problem.lambda_hi) << ")\n"
      << "    sigma_a       Hessian noise level (default " << format_real(d.problem.sigma_a) << ")\n"
      << "    sigma_b       linear-term noise level (default " << format_real(d.problem.sigma_b) << ")\n"
      << "    sop_seed      seed of the problem instance (default " << d.sop_seed << ")\n"
      << "    alpha_factor  step size is alpha_factor / L_hat (default " << format_real(d.alpha_factor) << ")\n"
      << "    l_samples     draws used to estimate L (default " << d.l_samples << ")\n"
      << "    linear_noise  uniform | sign (default uniform)\n";
    return o.str();
}

}  // namespace pema::harness
