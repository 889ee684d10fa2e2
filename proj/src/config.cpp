#include "mlen/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mlen {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::depolarize_cat: return "depolarize-cat";
    case ExperimentKind::quench: return "quench";
    case ExperimentKind::cmi_scan: return "cmi-scan";
    case ExperimentKind::correlator_benchmark: return "correlator-benchmark";
    case ExperimentKind::lyapunov: return "lyapunov";
    case ExperimentKind::collapse: return "collapse";
    }
    return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool parse_kind(std::string_view s, ExperimentKind& kind) {
    for (auto k : {ExperimentKind::depolarize_cat, ExperimentKind::quench, ExperimentKind::cmi_scan,
                   ExperimentKind::correlator_benchmark, ExperimentKind::lyapunov, ExperimentKind::collapse}) {
        if (s == to_string(k)) {
            kind = k;
            return true;
        }
    }
    return false;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

struct KindRules {
    std::set<std::string> required;
    std::set<std::string> allowed;
};

KindRules rules_for(ExperimentKind kind) {
    const std::set<std::string> evolution{"beta_i", "beta_f", "alpha", "steps", "d_max", "cutoff", "seed"};
    KindRules r;
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) r.allowed.insert(k);
    };
    switch (kind) {
    case ExperimentKind::quench:
        r.required = {"beta_i", "beta_f", "steps"};
        r.allowed = evolution;
        allow({"times", "r_max"});
        break;
    case ExperimentKind::cmi_scan:
        r.required = {"beta_i", "beta_f", "times", "b_sizes"};
        r.allowed = evolution;
        allow({"times", "b_sizes", "samples", "symmetrize", "fit"});
        break;
    case ExperimentKind::depolarize_cat:
        r.required = {"times", "b_sizes"};
        allow({"times", "b_sizes", "samples", "seed", "fit"});
        break;
    case ExperimentKind::correlator_benchmark:
        r.required = {"beta_i", "beta_f", "steps"};
        r.allowed = evolution;
        allow({"r_max", "times"});
        break;
    case ExperimentKind::lyapunov:
        r.required = {"beta_i", "beta_f", "times"};
        r.allowed = evolution;
        allow({"times", "replicas", "product_length", "b_sizes", "samples", "fit"});
        break;
    case ExperimentKind::collapse:
        r.required = {"times"};
        allow({"times", "b_sizes", "fit"});
        break;
    }
    for (const auto& k : r.required) r.allowed.insert(k);
    return r;
}

bool uses_evolution(ExperimentKind k) {
    return k == ExperimentKind::quench || k == ExperimentKind::cmi_scan || k == ExperimentKind::correlator_benchmark ||
           k == ExperimentKind::lyapunov;
}

struct Section {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;
};

class SectionChecker {
public:
    SectionChecker(const Section& s, ValidationResult& result) : section_(s), result_(result) {
        for (const auto& [k, v] : s.entries) values_[k] = v;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void error(const std::string& key, const std::string& message) {
        result_.errors.push_back(key.empty() ? fmt::format("{}: {}", section_.name, message)
                                             : fmt::format("{}.{}: {}", section_.name, key, message));
    }
    void warning(const std::string& message) { result_.warnings.push_back(fmt::format("{}: {}", section_.name, message)); }

    template <class F>
    void with(const std::string& key, F&& f) {
        auto it = values_.find(key);
        if (it == values_.end()) return;
        try {
            f(it->second);
        } catch (const std::exception& e) {
            error(key, e.what());
        }
    }

private:
    const Section& section_;
    ValidationResult& result_;
    std::map<std::string, std::string> values_;
};

long parse_integer(std::string_view text) {
    const double v = parse_double(text);
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9e15)
        throw std::invalid_argument("'" + std::string(text) + "' is not an integer");
    return static_cast<long>(v);
}

std::uint64_t parse_u64(std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::invalid_argument("'" + std::string(text) + "' is not an unsigned 64-bit integer");
    return v;
}

bool parse_bool(std::string_view text) {
    const std::string t = lower(trim(text));
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw std::invalid_argument("'" + std::string(text) + "' is not a boolean");
}

ExperimentSpec check_section(const Section& s, ExperimentKind kind, ValidationResult& result) {
    SectionChecker c(s, result);
    const KindRules rules = rules_for(kind);
    ExperimentSpec spec;
    spec.kind = kind;
    spec.name = s.name;

    std::set<std::string> seen;
    for (const auto& [key, value] : s.entries) {
        if (!seen.insert(key).second) c.error(key, "duplicate field");
        if (!rules.allowed.count(key)) c.error(key, fmt::format("unknown field for kind {}", to_string(kind)));
    }
    for (const auto& key : rules.required)
        if (!c.has(key)) c.error(key, fmt::format("missing required field {}", key));

    QuenchConfig& q = spec.quench;
    c.with("beta_i", [&](const std::string& v) {
        q.beta_i = parse_double(v);
        if (!(q.beta_i >= 0.0)) c.error("beta_i", "β_i must be >= 0 (inf selects the polarized state)");
    });
    c.with("beta_f", [&](const std::string& v) {
        q.beta_f = parse_double(v);
        if (!(q.beta_f >= 0.0) || !std::isfinite(q.beta_f)) c.error("beta_f", "β_f must be finite and >= 0");
    });
    c.with("alpha", [&](const std::string& v) {
        q.alpha = parse_double(v);
        if (!(q.alpha > 0.0 && q.alpha <= 1.0)) c.error("alpha", "α must lie in (0,1]");
    });
    c.with("steps", [&](const std::string& v) {
        const long n = parse_integer(v);
        if (n < 0 || n > 1000000) c.error("steps", "steps must lie in [0, 1000000]");
        q.steps = static_cast<int>(n);
    });
    c.with("d_max", [&](const std::string& v) {
        const long n = parse_integer(v);
        if (n < 1 || n > 4096) c.error("d_max", "d_max must lie in [1, 4096]");
        q.d_max = n;
    });
    c.with("cutoff", [&](const std::string& v) {
        q.cutoff = parse_double(v);
        if (!(q.cutoff >= 0.0 && q.cutoff < 1.0)) c.error("cutoff", "cutoff must lie in [0, 1)");
    });
    c.with("seed", [&](const std::string& v) { q.seed = parse_u64(v); });
    c.with("times", [&](const std::string& v) {
        spec.times = parse_number_list(v);
        if (spec.times.empty()) c.error("times", "times must be a non-empty list");
        for (double t : spec.times)
            if (!(t >= 0.0) || !std::isfinite(t)) c.error("times", "times must be finite and >= 0");
    });
    c.with("b_sizes", [&](const std::string& v) {
        for (double b : parse_number_list(v)) {
            if (b != std::floor(b) || b < 1 || b > 1e6) {
                c.error("b_sizes", fmt::format("|B| = {} is not an integer in [1, 1e6]", b));
                continue;
            }
            spec.b_sizes.push_back(static_cast<int>(b));
        }
        if (spec.b_sizes.empty()) c.error("b_sizes", "b_sizes must be a non-empty list");
        if (kind == ExperimentKind::collapse)
            for (int b : spec.b_sizes)
                if (b % 2 != 0) c.error("b_sizes", fmt::format("|B| = {} must be even for the exact curve", b));
    });
    c.with("samples", [&](const std::string& v) {
        spec.samples = parse_integer(v);
        if (spec.samples < 2) c.error("samples", "samples must be >= 2");
    });
    c.with("r_max", [&](const std::string& v) {
        const long n = parse_integer(v);
        if (n < 1 || n > 100000) c.error("r_max", "r_max must lie in [1, 100000]");
        spec.r_max = static_cast<int>(n);
    });
    c.with("replicas", [&](const std::string& v) {
        const long n = parse_integer(v);
        if (n < 1 || n > 100000) c.error("replicas", "replicas must lie in [1, 100000]");
        spec.replicas = static_cast<int>(n);
    });
    c.with("product_length", [&](const std::string& v) {
        const long n = parse_integer(v);
        if (n < 1 || n > 100000000) c.error("product_length", "product_length must lie in [1, 1e8]");
        spec.product_length = static_cast<int>(n);
    });
    spec.symmetrize = kind == ExperimentKind::cmi_scan && std::isinf(q.beta_i);
    c.with("symmetrize", [&](const std::string& v) { spec.symmetrize = parse_bool(v); });
    if (kind == ExperimentKind::collapse || kind == ExperimentKind::depolarize_cat) spec.fit = FitMethod::collapse_form;
    c.with("fit", [&](const std::string& v) { spec.fit = parse_fit_method(trim(v)); });

    if (uses_evolution(kind)) {
        if (c.has("beta_i") && c.has("beta_f") && q.beta_f > q.beta_i)
            c.warning(fmt::format("β_f = {} > β_i = {} (cooling quench)", format_double(q.beta_f),
                                  format_double(q.beta_i)));
        int max_step = 0;
        for (double t : spec.times) {
            const double steps = t / q.alpha;
            const double rounded = std::round(steps);
            if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
                c.error("times", fmt::format("t = {} is not a multiple of α = {}", format_double(t),
                                             format_double(q.alpha)));
                continue;
            }
            max_step = std::max(max_step, static_cast<int>(rounded));
        }
        if (!c.has("steps")) q.steps = max_step;
        else if (max_step > q.steps)
            c.error("times", fmt::format("largest time needs {} sweeps but steps = {}", max_step, q.steps));
    }
    return spec;
}

} // namespace

double parse_double(std::string_view text) {
    text = trim(text);
    const std::string t = lower(text);
    if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    if (t.empty()) throw std::invalid_argument("empty value");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::invalid_argument("'" + std::string(text) + "' is not a number");
    return v;
}

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view item = trim(text.substr(start, end - start));
        start = end + 1;
        if (item.empty()) {
            if (end == text.size()) break;
            throw std::invalid_argument("empty list entry");
        }
        const std::size_t c1 = item.find(':');
        if (c1 == std::string_view::npos) {
            out.push_back(parse_double(item));
        } else {
            const std::size_t c2 = item.find(':', c1 + 1);
            if (c2 == std::string_view::npos)
                throw std::invalid_argument("range '" + std::string(item) + "' must be start:stop:step");
            const double a = parse_double(item.substr(0, c1));
            const double b = parse_double(item.substr(c1 + 1, c2 - c1 - 1));
            const double h = parse_double(item.substr(c2 + 1));
            if (!(h > 0.0) || !std::isfinite(a) || !std::isfinite(b) || b < a)
                throw std::invalid_argument("range '" + std::string(item) + "' needs start <= stop and step > 0");
            const long n = static_cast<long>(std::floor((b - a) / h * (1.0 + 1e-12) + 1e-9));
            if (n > 10000000) throw std::invalid_argument("range '" + std::string(item) + "' is too long");
            for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
        }
    }
    return out;
}

std::vector<int> ExperimentSpec::steps_for_times() const {
    std::vector<int> steps;
    for (double t : times) steps.push_back(static_cast<int>(std::lround(t / quench.alpha)));
    return steps;
}

std::vector<std::pair<std::string, std::string>> describe(const ExperimentSpec& s) {
    std::vector<std::pair<std::string, std::string>> out{{"experiment", s.name}, {"kind", std::string(to_string(s.kind))}};
    if (uses_evolution(s.kind)) {
        out.emplace_back("beta_i", format_double(s.quench.beta_i));
        out.emplace_back("beta_f", format_double(s.quench.beta_f));
        out.emplace_back("alpha", format_double(s.quench.alpha));
        out.emplace_back("steps", std::to_string(s.quench.steps));
        out.emplace_back("d_max", std::to_string(s.quench.d_max));
        out.emplace_back("cutoff", format_double(s.quench.cutoff));
    }
    out.emplace_back("seed", std::to_string(s.quench.seed));
    if (!s.times.empty()) out.emplace_back("times", join(s.times));
    if (!s.b_sizes.empty()) out.emplace_back("b_sizes", join(s.b_sizes));
    switch (s.kind) {
    case ExperimentKind::cmi_scan:
    case ExperimentKind::depolarize_cat:
        out.emplace_back("samples", std::to_string(s.samples));
        out.emplace_back("symmetrize", s.symmetrize ? "true" : "false");
        out.emplace_back("fit", std::string(to_string(s.fit)));
        break;
    case ExperimentKind::correlator_benchmark:
    case ExperimentKind::quench:
        out.emplace_back("r_max", std::to_string(s.r_max));
        break;
    case ExperimentKind::lyapunov:
        out.emplace_back("replicas", std::to_string(s.replicas));
        out.emplace_back("product_length", std::to_string(s.product_length));
        if (!s.b_sizes.empty()) out.emplace_back("samples", std::to_string(s.samples));
        break;
    case ExperimentKind::collapse:
        out.emplace_back("fit", std::string(to_string(s.fit)));
        break;
    }
    return out;
}

ValidationResult validate_config(std::string_view text) {
    ValidationResult result;
    std::vector<Section> sections;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const std::size_t hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                result.errors.push_back(fmt::format("line {}: malformed section header", line_no));
                continue;
            }
            sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            result.errors.push_back(fmt::format("line {}: expected key = value", line_no));
            continue;
        }
        if (sections.empty()) {
            result.errors.push_back(fmt::format("line {}: field outside of any [section]", line_no));
            continue;
        }
        sections.back().entries.emplace_back(lower(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    }
    if (sections.empty() && result.errors.empty()) result.errors.push_back("config: no experiment sections");

    std::set<std::string> names;
    for (const auto& s : sections) {
        if (!names.insert(s.name).second) result.errors.push_back(fmt::format("{}: duplicate section", s.name));
        const std::string kind_name = s.name.substr(0, s.name.find('.'));
        ExperimentKind kind;
        if (!parse_kind(kind_name, kind)) {
            result.errors.push_back(fmt::format("{}: unknown experiment kind '{}'", s.name, kind_name));
            continue;
        }
        result.specs.push_back(check_section(s, kind, result));
    }
    if (!result.errors.empty()) result.specs.clear();
    return result;
}

} // namespace mlen
