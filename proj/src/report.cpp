#include "dragonboat/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dragonboat::report {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    const auto e = s.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::vector<Observation> read_long_csv(std::istream& in) {
    std::vector<Observation> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 4) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 4 columns");
        const auto v = to_number(cells[3]);
        if (!v) {
            if (rows.empty() && lineno == 1) continue;  // header
            throw std::runtime_error("line " + std::to_string(lineno) + ": value '" + cells[3] + "' is not a number");
        }
        if (!std::isfinite(*v)) throw std::runtime_error("line " + std::to_string(lineno) + ": non-finite value");
        rows.push_back({cells[0], cells[1], cells[2], *v});
    }
    return rows;
}

void write_long_csv(std::ostream& out, const std::vector<Observation>& rows) {
    out << "subject,condition,measure,value\n";
    out << std::setprecision(17);
    for (const auto& r : rows) out << r.subject << ',' << r.condition << ',' << r.measure << ',' << r.value << '\n';
}

std::vector<Observation> read_record_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<Observation> rows;
    for (const auto& path : files) {
        std::ifstream f(path);
        std::string line;
        nlohmann::json config, result;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            // Snapshot lines are the bulk of a record; skip them without parsing.
            if (line.rfind("{\"armed\"", 0) == 0) continue;
            auto j = nlohmann::json::parse(line);
            const auto type = j.value("type", std::string());
            if (type == "config") config = std::move(j);
            else if (type == "result") result = std::move(j);
        }
        if (config.is_null() || result.is_null()) throw std::runtime_error(path.string() + ": incomplete session record");
        std::string subject = config.contains("participant") ? config["participant"].value("id", std::string()) : "";
        if (subject.empty()) subject = path.stem().string();
        const std::string condition = config.value("technique", std::string("?"));
        auto add = [&](const char* m, double v) { rows.push_back({subject, condition, m, v}); };
        if (result.contains("completion_time") && result["completion_time"].is_number())
            add("completion_time", result["completion_time"].get<double>());
        add("collisions", result.value("collisions", 0.0));
        if (result.contains("physiology")) {
            add("avg_hr_pct", result["physiology"].value("avg_hr_pct", 0.0));
            add("kcal", result["physiology"].value("kcal", 0.0));
        }
    }
    return rows;
}

std::vector<Observation> score_questionnaire_csv(std::istream& in, stats::Instrument instrument) {
    const auto spec = stats::item_spec(instrument);
    std::vector<Observation> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != spec.count + 2)
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected subject, condition and " +
                                     std::to_string(spec.count) + " items");
        std::vector<int> items;
        bool header = false;
        for (std::size_t i = 2; i < cells.size(); ++i) {
            const auto v = to_number(cells[i]);
            if (!v) {
                header = true;
                break;
            }
            if (*v != std::floor(*v)) throw std::runtime_error("line " + std::to_string(lineno) + ": ratings must be integers");
            items.push_back(static_cast<int>(*v));
        }
        if (header) {
            if (lineno == 1 && rows.empty()) continue;
            throw std::runtime_error("line " + std::to_string(lineno) + ": non-numeric rating");
        }
        try {
            stats::validate_items(instrument, items);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
        auto add = [&](std::string m, double v) { rows.push_back({cells[0], cells[1], std::move(m), v}); };
        switch (instrument) {
            case stats::Instrument::ueq_s: {
                const auto s = stats::score_ueq_s(items);
                add("pragmatic", s.pragmatic);
                add("hedonic", s.hedonic);
                add("overall", s.overall);
                break;
            }
            case stats::Instrument::nasa_tlx: {
                const auto s = stats::score_nasa_tlx(items);
                for (std::size_t d = 0; d < s.size(); ++d) add(std::string(stats::tlx_dimensions[d]), s[d]);
                break;
            }
            case stats::Instrument::ssq: {
                const auto s = stats::score_ssq(items);
                add("nausea", s.nausea);
                add("oculomotor", s.oculomotor);
                add("disorientation", s.disorientation);
                add("total", s.total);
                break;
            }
        }
    }
    return rows;
}

std::vector<std::string> measures(const std::vector<Observation>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows)
        if (std::find(out.begin(), out.end(), r.measure) == out.end()) out.push_back(r.measure);
    return out;
}

stats::RepeatedMeasures pivot(const std::vector<Observation>& rows, const std::string& measure) {
    std::vector<std::string> conditions, subjects;
    std::map<std::pair<std::string, std::string>, double> cells;
    for (const auto& r : rows) {
        if (r.measure != measure) continue;
        if (std::find(conditions.begin(), conditions.end(), r.condition) == conditions.end())
            conditions.push_back(r.condition);
        if (std::find(subjects.begin(), subjects.end(), r.subject) == subjects.end()) subjects.push_back(r.subject);
        if (!cells.emplace(std::make_pair(r.subject, r.condition), r.value).second)
            throw std::runtime_error("duplicate " + measure + " for subject " + r.subject + " / " + r.condition);
    }
    if (conditions.empty()) throw std::runtime_error("no observations for measure '" + measure + "'");

    const std::vector<std::string> canonical = {"jc", "ic", "ec"};
    std::stable_sort(conditions.begin(), conditions.end(), [&](const std::string& a, const std::string& b) {
        auto rank = [&](const std::string& c) {
            const auto it = std::find(canonical.begin(), canonical.end(), lower(c));
            return it == canonical.end() ? canonical.size() : static_cast<std::size_t>(it - canonical.begin());
        };
        return rank(a) < rank(b);
    });

    stats::RepeatedMeasures m;
    m.conditions = conditions;
    m.subjects = subjects;
    for (const auto& s : subjects) {
        std::vector<double> row;
        for (const auto& c : conditions) {
            const auto it = cells.find({s, c});
            if (it == cells.end())
                throw std::runtime_error("subject " + s + " has no " + measure + " for condition " + c);
            row.push_back(it->second);
        }
        m.values.push_back(std::move(row));
    }
    return m;
}

Battery run_battery(const stats::RepeatedMeasures& m, const std::string& measure, double alpha) {
    m.validate();
    Battery b;
    b.measure = measure;
    b.data = m;
    for (std::size_t j = 0; j < m.k(); ++j) b.descriptives.push_back(stats::describe(m.column(j)));
    b.friedman = stats::friedman(m);
    b.alpha = alpha;
    const int comparisons = static_cast<int>(m.k() * (m.k() - 1) / 2);
    b.adjusted_alpha = stats::bonferroni_alpha(alpha, comparisons);
    b.pairwise = stats::posthoc_pairwise(m, alpha);
    b.anova = stats::rm_anova_oneway(m);
    b.art = stats::art_anova(m);
    return b;
}

std::string format_p(double p, int decimals) {
    std::ostringstream os;
    const double floor = std::pow(10.0, -decimals);
    if (p < floor) os << '<' << std::fixed << std::setprecision(decimals) << floor;
    else os << std::fixed << std::setprecision(decimals) << p;
    if (p < 0.001) os << " (***)";
    else if (p < 0.01) os << " (**)";
    else if (p < 0.05) os << " (*)";
    return os.str();
}

namespace {

std::string fixed(double v, int d) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(d) << v;
    return os.str();
}

std::string p4(double p) { return p < 1e-4 ? std::string("<0.0001") : fixed(p, 4); }

std::string label(const std::string& c) {
    std::string u = c;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    return u;
}

void print_f(std::ostream& out, const char* name, const stats::TestResult& r) {
    out << name << ": F(" << fixed(r.df[0], 0) << ", " << fixed(r.df[1], 0) << ") = " << fixed(r.statistic, 4)
        << ", p = " << format_p(r.p_value, 4);
    if (r.effect_size) out << ", partial eta^2 = " << fixed(*r.effect_size, 3);
    if (r.degenerate) out << "  [degenerate: zero error variance]";
    out << '\n';
}

}  // namespace

void print_battery(std::ostream& out, const Battery& b) {
    const auto& m = b.data;
    out << "Measure: " << b.measure << "  (n = " << m.n() << " subjects, k = " << m.k() << " conditions)\n\n";

    std::vector<std::string> header = {"Metric"};
    for (const auto& c : m.conditions) header.push_back(label(c));
    header.push_back("chi2(" + fixed(b.friedman.df[0], 0) + ")");
    header.push_back("p-value");
    std::vector<std::string> row = {b.measure};
    for (const auto& d : b.descriptives) row.push_back(fixed(d.mean, 2) + " (" + fixed(d.sd, 2) + ")");
    row.push_back(fixed(b.friedman.statistic, 3));
    row.push_back(format_p(b.friedman.p_value) + (b.friedman.exact ? " exact" : ""));
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max(header[i].size(), row[i].size()) + 2;
    for (std::size_t i = 0; i < header.size(); ++i) out << std::left << std::setw(static_cast<int>(width[i])) << header[i];
    out << '\n';
    for (std::size_t i = 0; i < row.size(); ++i) out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
    out << "\n\n";

    out << "Post-hoc Mann-Whitney U, Bonferroni adjusted alpha = " << fixed(b.adjusted_alpha, 4) << '\n';
    out << std::left << std::setw(14) << "Comparison" << std::setw(10) << "U" << std::setw(18) << "p (raw)"
        << std::setw(22) << "p x m (Bonferroni)" << "\n";
    bool over_one = false;
    for (const auto& c : b.pairwise) {
        const std::string name = label(m.conditions[c.a]) + " vs " + label(m.conditions[c.b]);
        std::string pb = p4(c.p_bonferroni);
        if (c.p_bonferroni > 1.0) {
            pb += " (>1)";
            over_one = true;
        }
        out << std::left << std::setw(14) << name << std::setw(10) << fixed(c.test.statistic, 1) << std::setw(18)
            << (p4(c.test.p_value) + (c.test.exact ? " exact" : "")) << std::setw(22) << pb
            << (c.significant ? "significant" : "") << '\n';
    }
    if (over_one) out << "note: multiplied p-values above 1 are shown uncapped\n";
    out << '\n';

    if (b.anova) print_f(out, "RM-ANOVA", *b.anova);
    if (b.art) print_f(out, "ART ANOVA", *b.art);
    out << "note: no sphericity correction applied\n";
}

void write_battery_csv(std::ostream& out, const std::vector<Battery>& batteries) {
    out << "measure,test,comparison,statistic,df1,df2,p,p_bonferroni,effect_size,flag\n";
    out << std::setprecision(10);
    for (const auto& b : batteries) {
        const auto& f = b.friedman;
        out << b.measure << ",friedman,all," << f.statistic << ',' << f.df[0] << ",," << f.p_value << ",,,"
            << (f.exact ? "exact" : "") << '\n';
        for (const auto& c : b.pairwise) {
            out << b.measure << ",mann_whitney," << b.data.conditions[c.a] << '-' << b.data.conditions[c.b] << ','
                << c.test.statistic << ",,," << c.test.p_value << ',' << c.p_bonferroni << ",,"
                << (c.p_bonferroni > 1.0 ? "bonferroni_gt_1" : (c.significant ? "significant" : "")) << '\n';
        }
        for (const auto* r : {b.anova ? &*b.anova : nullptr, b.art ? &*b.art : nullptr}) {
            if (!r) continue;
            out << b.measure << ',' << (r == &*b.anova ? "rm_anova" : "art_anova") << ",all," << r->statistic << ','
                << r->df[0] << ',' << r->df[1] << ',' << r->p_value << ",," << r->effect_size.value_or(0.0) << ','
                << (r->degenerate ? "degenerate" : "") << '\n';
        }
    }
}

}  // namespace dragonboat::report
