#include "tcm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tcm {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// key -> (value, line number)
using Section = std::map<std::string, std::pair<std::string, std::size_t>>;

struct RawConfig {
    std::map<std::string, Section> sections;
    std::vector<std::string> errors;
};

RawConfig tokenize(const std::string& text) {
    static const std::set<std::string> known_sections{
        "dataset", "strategy", "regime", "train", "run", "ablation", "aggregate"};
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                raw.errors.push_back("line " + std::to_string(line_no) +
                                     ": unterminated section header");
                continue;
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (!known_sections.count(section)) {
                raw.errors.push_back("line " + std::to_string(line_no) +
                                     ": unknown section [" + section + "]");
                section.clear();
            }
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            raw.errors.push_back("line " + std::to_string(line_no) +
                                 ": expected 'key = value', got '" + stripped + "'");
            continue;
        }
        if (section.empty()) {
            raw.errors.push_back("line " + std::to_string(line_no) +
                                 ": key outside any [section]");
            continue;
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            raw.errors.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        if (!raw.sections[section].emplace(key, std::make_pair(value, line_no)).second) {
            raw.errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" +
                                 key + "' in [" + section + "]");
        }
    }
    return raw;
}

// Typed readers; every failure lands in `errors` so the caller sees the
// complete list at once.
class SectionReader {
public:
    SectionReader(const RawConfig& raw, const std::string& name,
                  std::vector<std::string>& errors)
        : name_(name), errors_(errors) {
        const auto it = raw.sections.find(name);
        if (it != raw.sections.end()) section_ = &it->second;
    }

    bool present() const { return section_ != nullptr; }

    std::optional<std::string> get(const std::string& key) {
        if (!section_) return std::nullopt;
        const auto it = section_->find(key);
        if (it == section_->end()) return std::nullopt;
        used_.insert(key);
        return it->second.first;
    }

    std::optional<long long> get_int(const std::string& key) {
        const auto text = get(key);
        if (!text) return std::nullopt;
        char* end = nullptr;
        const long long v = std::strtoll(text->c_str(), &end, 10);
        if (text->empty() || end != text->c_str() + text->size()) {
            fail(key, "cannot parse integer '" + *text + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> get_double(const std::string& key) {
        const auto text = get(key);
        if (!text) return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(text->c_str(), &end);
        if (text->empty() || end != text->c_str() + text->size()) {
            fail(key, "cannot parse number '" + *text + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::vector<long long>> get_int_list(const std::string& key) {
        const auto text = get(key);
        if (!text) return std::nullopt;
        std::vector<long long> values;
        std::size_t pos = 0;
        while (pos <= text->size()) {
            const std::size_t comma = text->find(',', pos);
            const std::string cell = trim(text->substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (cell.empty()) {
                fail(key, "empty element in list '" + *text + "'");
                return std::nullopt;
            }
            char* end = nullptr;
            const long long v = std::strtoll(cell.c_str(), &end, 10);
            if (end != cell.c_str() + cell.size()) {
                fail(key, "cannot parse integer '" + cell + "'");
                return std::nullopt;
            }
            values.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return values;
    }

    void fail(const std::string& key, const std::string& message) {
        errors_.push_back("[" + name_ + "] " + key + ": " + message);
    }

    void report_unknown_keys() {
        if (!section_) return;
        for (const auto& [key, value] : *section_) {
            if (!used_.count(key)) {
                errors_.push_back("line " + std::to_string(value.second) +
                                  ": unknown key '" + key + "' in [" + name_ + "]");
            }
        }
    }

private:
    const Section* section_ = nullptr;
    std::string name_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

}  // namespace

ParseResult parse_config_text(const std::string& text, bool require_experiment) {
    ParseResult result;
    RawConfig raw = tokenize(text);
    std::vector<std::string>& errors = result.errors;
    errors.insert(errors.end(), raw.errors.begin(), raw.errors.end());

    CliConfig cli;
    ExperimentConfig& config = cli.experiment;

    // [dataset]
    {
        SectionReader ds(raw, "dataset", errors);
        const auto features = ds.get("features");
        const auto labels = ds.get("labels");
        const auto classes = ds.get_int("classes");
        const auto per_class = ds.get_int("per_class");
        const auto dim = ds.get_int("dim");
        const auto separation = ds.get_double("separation");
        const auto sigma = ds.get_double("sigma");
        const auto data_seed = ds.get_int("data_seed");
        const auto rho = ds.get_double("longtail_rho");
        const auto lt_seed = ds.get_int("longtail_seed");

        const bool has_files = features.has_value() || labels.has_value();
        const bool has_mixture = classes.has_value() || per_class.has_value() || dim.has_value();
        if (!ds.present()) {
            if (require_experiment) errors.push_back("[dataset] section is required");
        } else if (has_files && has_mixture) {
            errors.push_back("[dataset]: give either features/labels files or a synthetic "
                             "mixture, not both");
        } else if (has_files) {
            if (!features) ds.fail("features", "missing (labels given without features)");
            if (!labels) ds.fail("labels", "missing (features given without labels)");
            config.dataset.features_path = features;
            config.dataset.labels_path = labels;
        } else if (has_mixture) {
            MixtureSpec spec;
            if (!classes) { ds.fail("classes", "required for a synthetic dataset"); }
            if (!per_class) { ds.fail("per_class", "required for a synthetic dataset"); }
            if (!dim) { ds.fail("dim", "required for a synthetic dataset"); }
            if (classes) {
                if (*classes < 2) ds.fail("classes", "must be >= 2");
                spec.class_count = static_cast<int>(*classes);
            }
            if (per_class) {
                if (*per_class < 1) ds.fail("per_class", "must be >= 1");
                spec.samples_per_class = static_cast<int>(*per_class);
            }
            if (dim) {
                if (*dim < 1) ds.fail("dim", "must be >= 1");
                spec.dim = static_cast<int>(*dim);
            }
            if (separation) {
                if (*separation < 0.0) ds.fail("separation", "must be >= 0");
                spec.center_separation = *separation;
            }
            if (sigma) {
                if (!(*sigma > 0.0)) ds.fail("sigma", "must be > 0");
                spec.noise_sigma = *sigma;
            }
            if (data_seed) spec.seed = static_cast<std::uint64_t>(*data_seed);
            config.dataset.mixture = spec;
        } else if (require_experiment || ds.present()) {
            errors.push_back("[dataset]: missing source; give features/labels paths or "
                             "classes/per_class/dim");
        }
        if (rho.has_value()) {
            if (*rho < 1.0) ds.fail("longtail_rho", "must be >= 1");
            LongTailSpec lt;
            lt.imbalance_ratio = *rho;
            if (lt_seed) lt.seed = static_cast<std::uint64_t>(*lt_seed);
            config.dataset.longtail = lt;
        } else if (lt_seed.has_value()) {
            ds.fail("longtail_seed", "given without longtail_rho");
        }
        ds.report_unknown_keys();
    }

    // [strategy]
    {
        SectionReader st(raw, "strategy", errors);
        const auto name = st.get("name");
        if (!st.present() || !name) {
            if (require_experiment || st.present()) {
                errors.push_back("[strategy] name is required");
            }
        } else {
            const auto kind = sampler_kind_from_str(*name);
            if (!kind) {
                st.fail("name", "unknown strategy '" + *name + "'");
            } else {
                config.strategy.kind = *kind;
            }
        }
        if (const auto steps = st.get_int("typiclust_steps")) {
            if (*steps < 0) st.fail("typiclust_steps", "must be >= 0");
            config.strategy.typiclust_steps = static_cast<int>(*steps);
        }
        if (const auto rule = st.get("tc_rule")) {
            if (*rule == "20c") {
                config.strategy.use_20c_rule = true;
            } else if (*rule != "fixed") {
                st.fail("tc_rule", "expected 'fixed' or '20c', got '" + *rule + "'");
            }
        }
        if (const auto delta = st.get("delta")) {
            if (*delta == "auto") {
                config.strategy.probcover_delta = 0.0;
            } else {
                char* end = nullptr;
                const double v = std::strtod(delta->c_str(), &end);
                if (delta->empty() || end != delta->c_str() + delta->size() || !(v > 0.0)) {
                    st.fail("delta", "expected 'auto' or a positive number, got '" + *delta +
                                         "'");
                } else {
                    config.strategy.probcover_delta = v;
                }
            }
        }
        if (const auto nk = st.get_int("neighbor_k")) {
            if (*nk < 1) st.fail("neighbor_k", "must be >= 1");
            config.strategy.neighbor_k = static_cast<int>(*nk);
        }
        st.report_unknown_keys();
    }

    // [regime]
    {
        SectionReader rg(raw, "regime", errors);
        const auto name = rg.get("name");
        if (!rg.present() || !name) {
            if (require_experiment || rg.present()) {
                errors.push_back("[regime] name is required");
            }
        } else if (*name == "tiny") {
            config.regime = RegimeName::Tiny;
        } else if (*name == "small") {
            config.regime = RegimeName::Small;
        } else if (*name == "medium") {
            config.regime = RegimeName::Medium;
        } else if (*name == "large") {
            config.regime = RegimeName::Large;
        } else {
            rg.fail("name", "unknown regime '" + *name +
                                "' (expected tiny|small|medium|large)");
        }
        if (const auto v = rg.get_int("initial_budget")) {
            if (*v < 1) rg.fail("initial_budget", "must be >= 1");
            config.overrides.initial_budget = static_cast<int>(*v);
        }
        if (const auto v = rg.get_int("step_size")) {
            if (*v < 1) rg.fail("step_size", "must be >= 1");
            config.overrides.step_size = static_cast<int>(*v);
        }
        if (const auto v = rg.get_int("num_steps")) {
            if (*v < 0) rg.fail("num_steps", "must be >= 0");
            config.overrides.num_steps = static_cast<int>(*v);
        }
        rg.report_unknown_keys();
    }

    // [train]
    {
        SectionReader tr(raw, "train", errors);
        if (const auto v = tr.get_double("learning_rate")) {
            if (!(*v > 0.0)) tr.fail("learning_rate", "must be > 0");
            config.train.learning_rate = *v;
        }
        if (const auto v = tr.get_int("epochs")) {
            if (*v < 1) tr.fail("epochs", "must be >= 1");
            config.train.epochs = static_cast<int>(*v);
        }
        if (const auto v = tr.get_double("l2_penalty")) {
            if (*v < 0.0) tr.fail("l2_penalty", "must be >= 0");
            config.train.l2_penalty = *v;
        }
        if (const auto v = tr.get_int("batch_size")) {
            if (*v < 1) tr.fail("batch_size", "must be >= 1");
            config.train.batch_size = static_cast<int>(*v);
        }
        if (const auto v = tr.get_double("momentum")) {
            if (*v < 0.0 || *v >= 1.0) tr.fail("momentum", "must lie in [0, 1)");
            config.train.momentum = *v;
        }
        if (const auto v = tr.get_int("seed")) {
            config.train.seed = static_cast<std::uint64_t>(*v);
        }
        tr.report_unknown_keys();
    }

    // [run]
    {
        SectionReader rn(raw, "run", errors);
        if (const auto seeds = rn.get_int_list("seeds")) {
            if (seeds->empty()) {
                rn.fail("seeds", "must list at least one seed");
            } else {
                config.seeds.clear();
                for (long long s : *seeds) config.seeds.push_back(static_cast<std::uint64_t>(s));
            }
        }
        if (const auto v = rn.get_double("test_fraction")) {
            if (!(*v > 0.0 && *v < 1.0)) rn.fail("test_fraction", "must lie in (0, 1)");
            config.test_fraction = *v;
        }
        if (const auto v = rn.get("test_indices")) {
            config.test_index_path = *v;
        }
        if (const auto v = rn.get("metric")) {
            const auto metric = metric_from_str(*v);
            if (!metric) {
                rn.fail("metric", "expected accuracy|balanced_accuracy, got '" + *v + "'");
            } else {
                config.metric = *metric;
            }
        }
        rn.report_unknown_keys();
    }

    // [ablation]
    {
        SectionReader ab(raw, "ablation", errors);
        if (const auto ns = ab.get_int_list("transition_ns")) {
            for (long long n : *ns) {
                if (n < 1) ab.fail("transition_ns", "every N must be >= 1");
            }
            cli.ablation.transition_ns.assign(ns->begin(), ns->end());
        }
        if (const auto ss = ab.get_int_list("step_sizes")) {
            for (long long s : *ss) {
                if (s < 1) ab.fail("step_sizes", "every step size must be >= 1");
            }
            cli.ablation.step_sizes.assign(ss->begin(), ss->end());
        }
        ab.report_unknown_keys();
    }

    // [aggregate]
    {
        SectionReader ag(raw, "aggregate", errors);
        if (const auto dir = ag.get("records_dir")) {
            cli.aggregate.records_dir = *dir;
        }
        if (const auto group = ag.get("group")) {
            if (*group == "pooled") {
                cli.aggregate.grouping = AggregateGrouping::Pooled;
            } else if (*group == "per-budget") {
                cli.aggregate.grouping = AggregateGrouping::PerBudget;
            } else {
                ag.fail("group", "expected per-budget|pooled, got '" + *group + "'");
            }
        }
        ag.report_unknown_keys();
    }

    // Static schedule feasibility for synthetic sources, where N is known
    // before generation. File-backed datasets are checked after loading.
    if (errors.empty() && config.dataset.mixture.has_value()) {
        const MixtureSpec& mix = *config.dataset.mixture;
        long long n = 0;
        if (config.dataset.longtail.has_value()) {
            for (int c = 0; c < mix.class_count; ++c) {
                n += longtail_class_size(mix.samples_per_class,
                                         config.dataset.longtail->imbalance_ratio,
                                         mix.class_count, c);
            }
        } else {
            n = static_cast<long long>(mix.class_count) * mix.samples_per_class;
        }
        const RegimeSpec regime =
            resolve_regime(config.regime, mix.class_count, config.overrides);
        if (regime.schedule.total_budget() > n) {
            errors.push_back("[regime]: schedule needs " +
                             std::to_string(regime.schedule.total_budget()) +
                             " samples but the dataset has only " + std::to_string(n));
        }
    }

    if (errors.empty()) {
        result.config = std::move(cli);
    }
    return result;
}

ParseResult parse_config(const std::string& path, bool require_experiment) {
    std::ifstream in(path);
    if (!in) {
        ParseResult result;
        result.errors.push_back("cannot open config file " + path);
        return result;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), require_experiment);
}

}  // namespace tcm
