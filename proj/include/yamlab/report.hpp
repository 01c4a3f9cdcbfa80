#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace yamlab {

struct CaseRow {
    std::string case_id;
    std::string params;  // semicolon-joined key=value
    double value = 0.0;
    double reference = 0.0;
    double margin = 0.0;
    bool pass = false;
};

struct Report {
    std::string scenario;
    std::string params;
    std::vector<CaseRow> rows;

    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
    void add(std::string case_id, std::string params_, double value, double reference,
             double margin, bool pass) {
        rows.push_back({std::move(case_id), std::move(params_), value, reference, margin, pass});
    }
};

inline std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void emit_csv(const Report& r, std::ostream& os) {
    os << "scenario,case_id,params,value,reference,margin,pass\n";
    for (const auto& row : r.rows) {
        os << r.scenario << ',' << row.case_id << ',' << row.params << ','
           << format_g12(row.value) << ',' << format_g12(row.reference) << ','
           << format_g12(row.margin) << ',' << (row.pass ? "true" : "false") << '\n';
    }
}

/// Returns false on any I/O failure (caller maps that to exit code 3).
inline bool emit_csv(const Report& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // binary: keep LF endings everywhere
    if (!f) return false;
    emit_csv(r, f);
    f.flush();
    return bool(f);
}

}  // namespace yamlab
