// Fixed-layout MPS writer and reader for MilpModel. Names longer than eight
// characters are renamed deterministically and recorded in a sidecar map next
// to the file, so a round trip restores the original model exactly.
#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eanm/milp.hpp"

namespace eanm {

struct MpsNameMap {
    std::map<std::string, std::string> rows;  // mps name -> original
    std::map<std::string, std::string> cols;
    bool empty() const { return rows.empty() && cols.empty(); }
};

struct MpsWriteResult {
    size_t bytes = 0;
    MpsNameMap renamed;  // only entries whose name actually changed
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, p);
}

inline bool mps_name_ok(const std::string& s) {
    if (s.empty() || s.size() > 8) return false;
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\'' || c == '"') return false;
    return true;
}

class NameShortener {
  public:
    explicit NameShortener(char prefix) : prefix_(prefix) {}

    std::string assign(const std::string& original) {
        if (mps_name_ok(original) && !used_.count(original)) {
            used_.insert({original, 1});
            return original;
        }
        std::string candidate;
        do {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%c%07d", prefix_, counter_++);
            candidate = buf;
        } while (used_.count(candidate));
        used_.insert({candidate, 1});
        renamed_[candidate] = original;
        return candidate;
    }

    void reserve(const std::string& name) { used_.insert({name, 1}); }
    const std::map<std::string, std::string>& renamed() const { return renamed_; }

  private:
    char prefix_;
    int counter_ = 1;
    std::map<std::string, int> used_;
    std::map<std::string, std::string> renamed_;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& p) {
    std::filesystem::path s = p;
    s += ".names";
    return s;
}

}  // namespace detail

inline MpsWriteResult export_lp_file(const MilpModel& model, const std::filesystem::path& path) {
    {
        auto bad = model.check();
        if (!bad.empty()) throw Error("malformed model: " + bad.front());
    }
    detail::NameShortener row_names('R');
    detail::NameShortener col_names('C');
    row_names.reserve("COST");
    std::vector<std::string> rname(model.lp.rows.size());
    for (size_t i = 0; i < model.lp.rows.size(); ++i)
        rname[i] = row_names.assign(model.lp.rows[i].name);
    std::vector<std::string> cname(model.lp.variables.size());
    for (size_t j = 0; j < model.lp.variables.size(); ++j)
        cname[j] = col_names.assign(model.lp.variables[j].name);

    // Column-major coefficient lists; the LP stores rows sparse.
    std::vector<std::vector<std::pair<int, double>>> by_col(model.lp.variables.size());
    for (size_t i = 0; i < model.lp.rows.size(); ++i)
        for (auto& [j, c] : model.lp.rows[i].coeffs)
            by_col[j].emplace_back(static_cast<int>(i), c);

    std::ostringstream os;
    char line[96];
    os << "NAME          MODEL\n";
    os << "ROWS\n";
    os << " N  COST\n";
    for (size_t i = 0; i < model.lp.rows.size(); ++i) {
        char t = model.lp.rows[i].relation == Relation::LessEqual      ? 'L'
                 : model.lp.rows[i].relation == Relation::GreaterEqual ? 'G'
                                                                       : 'E';
        std::snprintf(line, sizeof line, " %c  %s\n", t, rname[i].c_str());
        os << line;
    }
    os << "COLUMNS\n";
    bool in_integer = false;
    int marker_no = 0;
    for (size_t j = 0; j < model.lp.variables.size(); ++j) {
        bool is_int = model.integrality.count(model.lp.variables[j].name) > 0;
        if (is_int != in_integer) {
            std::snprintf(line, sizeof line, "    M%07d  'MARKER'                 '%s'\n",
                          ++marker_no, is_int ? "INTORG" : "INTEND");
            os << line;
            in_integer = is_int;
        }
        bool wrote_entry = false;
        if (model.lp.variables[j].objective != 0.0) {
            std::snprintf(line, sizeof line, "    %-8s  %-8s  %s\n", cname[j].c_str(), "COST",
                          detail::format_double(model.lp.variables[j].objective).c_str());
            os << line;
            wrote_entry = true;
        }
        for (auto& [i, c] : by_col[j]) {
            std::snprintf(line, sizeof line, "    %-8s  %-8s  %s\n", cname[j].c_str(),
                          rname[i].c_str(), detail::format_double(c).c_str());
            os << line;
            wrote_entry = true;
        }
        if (!wrote_entry) {
            // keep the column visible to the reader
            std::snprintf(line, sizeof line, "    %-8s  %-8s  0\n", cname[j].c_str(), "COST");
            os << line;
        }
    }
    if (in_integer) {
        std::snprintf(line, sizeof line, "    M%07d  'MARKER'                 'INTEND'\n",
                      ++marker_no);
        os << line;
    }
    os << "RHS\n";
    for (size_t i = 0; i < model.lp.rows.size(); ++i) {
        if (model.lp.rows[i].rhs == 0.0) continue;
        std::snprintf(line, sizeof line, "    %-8s  %-8s  %s\n", "RHS", rname[i].c_str(),
                      detail::format_double(model.lp.rows[i].rhs).c_str());
        os << line;
    }
    os << "BOUNDS\n";
    for (size_t j = 0; j < model.lp.variables.size(); ++j) {
        const LpVariable& v = model.lp.variables[j];
        if (v.lower == v.upper) {
            std::snprintf(line, sizeof line, " FX %-8s  %-8s  %s\n", "BND", cname[j].c_str(),
                          detail::format_double(v.lower).c_str());
            os << line;
            continue;
        }
        if (std::isfinite(v.upper)) {
            std::snprintf(line, sizeof line, " UP %-8s  %-8s  %s\n", "BND", cname[j].c_str(),
                          detail::format_double(v.upper).c_str());
            os << line;
        }
        if (!std::isfinite(v.lower)) {
            std::snprintf(line, sizeof line, " MI %-8s  %-8s\n", "BND", cname[j].c_str());
            os << line;
        } else if (v.lower != 0.0) {
            std::snprintf(line, sizeof line, " LO %-8s  %-8s  %s\n", "BND", cname[j].c_str(),
                          detail::format_double(v.lower).c_str());
            os << line;
        }
    }
    os << "ENDATA\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    std::string body = os.str();
    f << body;
    f.close();
    if (!f) throw Error("write failed for " + path.string());

    MpsWriteResult result;
    result.bytes = body.size();
    result.renamed.rows = row_names.renamed();
    result.renamed.cols = col_names.renamed();
    std::filesystem::path side = detail::sidecar_path(path);
    if (!result.renamed.empty()) {
        std::ofstream sf(side, std::ios::binary);
        if (!sf) throw Error("cannot write " + side.string());
        for (auto& [mps, orig] : result.renamed.rows) sf << "R\t" << mps << "\t" << orig << "\n";
        for (auto& [mps, orig] : result.renamed.cols) sf << "C\t" << mps << "\t" << orig << "\n";
    } else if (std::filesystem::exists(side)) {
        std::filesystem::remove(side);  // stale map from a previous export
    }
    return result;
}

namespace detail {

struct MpsParser {
    std::ifstream in;
    std::string path;
    int lineno = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(path + ":" + std::to_string(lineno) + ": " + why);
    }

    double number(const std::string& tok) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail("bad number '" + tok + "'");
        return v;
    }
};

}  // namespace detail

inline MilpModel import_lp_file(const std::filesystem::path& path) {
    detail::MpsParser p;
    p.in.open(path);
    p.path = path.string();
    if (!p.in) throw Error("cannot read " + path.string());

    MpsNameMap sidecar;
    {
        std::ifstream sf(detail::sidecar_path(path));
        std::string kind, mps, orig;
        while (sf >> kind >> mps >> orig) {
            if (kind == "R") sidecar.rows[mps] = orig;
            else if (kind == "C") sidecar.cols[mps] = orig;
        }
    }
    auto original_row = [&](const std::string& n) {
        auto it = sidecar.rows.find(n);
        return it == sidecar.rows.end() ? n : it->second;
    };
    auto original_col = [&](const std::string& n) {
        auto it = sidecar.cols.find(n);
        return it == sidecar.cols.end() ? n : it->second;
    };

    enum Section { None, Name, Rows, Columns, Rhs, Ranges, Bounds, End };
    Section section = None;
    MilpModel model;
    std::string objective_row;
    std::map<std::string, int> row_of;       // mps row name -> index
    std::map<std::string, int> col_of;       // mps col name -> index
    std::vector<char> row_type;
    std::vector<std::string> integer_cols;
    struct RangeEntry { int row; double value; };
    std::vector<RangeEntry> ranges;
    bool in_integer = false;

    std::string raw;
    while (std::getline(p.in, raw)) {
        ++p.lineno;
        if (raw.empty() || raw[0] == '*') continue;
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;
        bool header = raw[0] != ' ' && raw[0] != '\t';
        if (header) {
            Section next = None;
            if (tok[0] == "NAME") next = Name;
            else if (tok[0] == "ROWS") next = Rows;
            else if (tok[0] == "COLUMNS") next = Columns;
            else if (tok[0] == "RHS") next = Rhs;
            else if (tok[0] == "RANGES") next = Ranges;
            else if (tok[0] == "BOUNDS") next = Bounds;
            else if (tok[0] == "ENDATA") next = End;
            else p.fail("unknown section '" + tok[0] + "'");
            if (next <= section) p.fail("section " + tok[0] + " out of order");
            if ((next == Columns || next == Rhs) && section < Rows)
                p.fail("section " + tok[0] + " before ROWS");
            section = next;
            if (section == End) break;
            continue;
        }
        switch (section) {
            case Rows: {
                if (tok.size() != 2) p.fail("ROWS entry needs a type and a name");
                char ty = static_cast<char>(std::toupper(tok[0][0]));
                if (tok[0].size() != 1 || (ty != 'N' && ty != 'L' && ty != 'G' && ty != 'E'))
                    p.fail("unknown row type '" + tok[0] + "'");
                if (ty == 'N') {
                    if (!objective_row.empty()) p.fail("second objective row");
                    objective_row = tok[1];
                    break;
                }
                if (row_of.count(tok[1])) p.fail("duplicate row " + tok[1]);
                Relation rel = ty == 'L'   ? Relation::LessEqual
                               : ty == 'G' ? Relation::GreaterEqual
                                           : Relation::Equal;
                row_of[tok[1]] = model.lp.add_row(original_row(tok[1]), rel, 0.0, {});
                row_type.push_back(ty);
                break;
            }
            case Columns: {
                if (tok.size() >= 3 && tok[1] == "'MARKER'") {
                    if (tok[2] == "'INTORG'") in_integer = true;
                    else if (tok[2] == "'INTEND'") in_integer = false;
                    else p.fail("unknown marker " + tok[2]);
                    break;
                }
                if (tok.size() != 3 && tok.size() != 5) p.fail("bad COLUMNS entry");
                auto cit = col_of.find(tok[0]);
                int j;
                if (cit == col_of.end()) {
                    j = model.lp.add_variable(original_col(tok[0]), 0.0, kInf, 0.0);
                    col_of[tok[0]] = j;
                    if (in_integer) integer_cols.push_back(tok[0]);
                } else {
                    j = cit->second;
                }
                for (size_t k = 1; k + 1 < tok.size(); k += 2) {
                    double v = p.number(tok[k + 1]);
                    if (tok[k] == objective_row) {
                        model.lp.variables[j].objective += v;
                    } else {
                        auto rit = row_of.find(tok[k]);
                        if (rit == row_of.end()) p.fail("unknown row " + tok[k]);
                        model.lp.rows[rit->second].coeffs.emplace_back(j, v);
                    }
                }
                break;
            }
            case Rhs: {
                if (tok.size() != 3 && tok.size() != 5) p.fail("bad RHS entry");
                for (size_t k = 1; k + 1 < tok.size(); k += 2) {
                    if (tok[k] == objective_row) continue;  // objective offsets ignored
                    auto rit = row_of.find(tok[k]);
                    if (rit == row_of.end()) p.fail("unknown row " + tok[k]);
                    model.lp.rows[rit->second].rhs = p.number(tok[k + 1]);
                }
                break;
            }
            case Ranges: {
                if (tok.size() != 3 && tok.size() != 5) p.fail("bad RANGES entry");
                for (size_t k = 1; k + 1 < tok.size(); k += 2) {
                    auto rit = row_of.find(tok[k]);
                    if (rit == row_of.end()) p.fail("unknown row " + tok[k]);
                    ranges.push_back({rit->second, p.number(tok[k + 1])});
                }
                break;
            }
            case Bounds: {
                if (tok.size() != 3 && tok.size() != 4) p.fail("bad BOUNDS entry");
                auto cit = col_of.find(tok[2]);
                if (cit == col_of.end()) p.fail("bounds for unknown column " + tok[2]);
                LpVariable& v = model.lp.variables[cit->second];
                const std::string& ty = tok[0];
                auto need_value = [&]() {
                    if (tok.size() != 4) p.fail("bound type " + ty + " needs a value");
                    return p.number(tok[3]);
                };
                if (ty == "UP") v.upper = need_value();
                else if (ty == "LO") v.lower = need_value();
                else if (ty == "FX") v.lower = v.upper = need_value();
                else if (ty == "MI") v.lower = -kInf;
                else if (ty == "PL") v.upper = kInf;
                else if (ty == "FR") { v.lower = -kInf; v.upper = kInf; }
                else if (ty == "BV") { v.lower = 0.0; v.upper = 1.0; }
                else p.fail("unknown bound type " + ty);
                break;
            }
            case Name:
                break;  // free-form model name continuation
            default:
                p.fail("data before any section header");
        }
    }
    if (section != End) p.fail("missing ENDATA");
    if (objective_row.empty()) p.fail("no objective (N) row");

    // Expand ranged rows into an extra row carrying the second bound.
    for (const RangeEntry& re : ranges) {
        const LpRow base = model.lp.rows[re.row];
        double r = re.value;
        Relation extra_rel;
        double extra_rhs;
        if (base.relation == Relation::LessEqual) {
            extra_rel = Relation::GreaterEqual;
            extra_rhs = base.rhs - std::fabs(r);
        } else if (base.relation == Relation::GreaterEqual) {
            extra_rel = Relation::LessEqual;
            extra_rhs = base.rhs + std::fabs(r);
        } else {
            model.lp.rows[re.row].relation =
                r >= 0 ? Relation::GreaterEqual : Relation::LessEqual;
            extra_rel = r >= 0 ? Relation::LessEqual : Relation::GreaterEqual;
            extra_rhs = base.rhs + r;
        }
        model.lp.add_row(base.name + ".rng", extra_rel, extra_rhs, base.coeffs);
    }

    for (const std::string& mps : integer_cols) {
        int j = col_of.at(mps);
        LpVariable& v = model.lp.variables[j];
        const std::string& name = v.name;
        bool binaryish = v.lower >= -1e-9 && v.upper <= 1.0 + 1e-9 && std::isfinite(v.upper);
        model.integrality[name] = binaryish ? IntegerKind::Binary : IntegerKind::General;
    }
    return model;
}

}  // namespace eanm
