#include "ccssp/mps.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "ccssp/errors.hpp"

namespace ccssp {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void field_line(std::ostream& os, const std::string& f1, const std::string& f2,
                const std::string& f3 = "") {
  // Classic field starts (cols 5/15/25); names longer than a slot push the
  // next field right, keeping at least two separating spaces.
  os << "    " << f1;
  if (f1.size() < 8) os << std::string(8 - f1.size(), ' ');
  os << "  " << f2;
  if (!f3.empty()) {
    if (f2.size() < 8) os << std::string(8 - f2.size(), ' ');
    os << "  " << f3;
  }
  os << "\n";
}

}  // namespace

void write_mps(const ModelIR& model, std::ostream& os, const std::string& name) {
  os << "NAME          " << name << "\n";
  os << "OBJSENSE\n    " << (model.sense == Sense::Maximize ? "MAX" : "MIN")
     << "\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (const auto& row : model.rows) {
    os << " " << (row.rel == Relation::Eq ? "E" : "L") << "  " << row.name
       << "\n";
  }

  // Column-major coefficient lists.
  std::vector<std::vector<std::pair<std::string, double>>> col_entries(
      model.vars.size());
  for (const auto& row : model.rows) {
    for (std::size_t t = 0; t < row.idx.size(); ++t) {
      col_entries[row.idx[t]].emplace_back(row.name, row.coef[t]);
    }
  }

  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    const auto& var = model.vars[j];
    if (var.integral != in_int) {
      os << "    MARKER" << marker++ << "  'MARKER'  "
         << (var.integral ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = var.integral;
    }
    if (model.objective[j] != 0.0) {
      field_line(os, var.name, "OBJ", num(model.objective[j]));
    }
    for (const auto& [row_name, coef] : col_entries[j]) {
      field_line(os, var.name, row_name, num(coef));
    }
    if (model.objective[j] == 0.0 && col_entries[j].empty()) {
      field_line(os, var.name, "OBJ", "0");
    }
  }
  if (in_int) {
    os << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";
  }

  os << "RHS\n";
  for (const auto& row : model.rows) {
    if (row.rhs != 0.0) field_line(os, "RHS1", row.name, num(row.rhs));
  }

  os << "BOUNDS\n";
  for (const auto& var : model.vars) {
    if (var.integral && var.lb == 0.0 && var.ub == 1.0) {
      os << " BV  BND1  " << var.name << "\n";
      continue;
    }
    if (var.lb == var.ub) {
      os << " FX  BND1  " << var.name << "  " << num(var.lb) << "\n";
      continue;
    }
    if (var.lb != 0.0) {
      os << " LO  BND1  " << var.name << "  " << num(var.lb) << "\n";
    }
    if (std::isfinite(var.ub)) {
      os << " UP  BND1  " << var.name << "  " << num(var.ub) << "\n";
    }
  }
  os << "ENDATA\n";
}

std::string to_mps(const ModelIR& model, const std::string& name) {
  std::ostringstream os;
  write_mps(model, os, name);
  return os.str();
}

ModelIR read_mps(std::istream& is) {
  ModelIR model;
  std::map<std::string, std::uint32_t> row_ids;
  std::map<std::string, std::uint32_t> col_ids;
  std::string section;
  std::string line;
  bool in_int = false;
  bool maximize = false;
  bool objsense_pending = false;

  auto get_col = [&](const std::string& name) -> std::uint32_t {
    auto it = col_ids.find(name);
    if (it != col_ids.end()) return it->second;
    const std::uint32_t id =
        model.add_var(name, 0.0, std::numeric_limits<double>::infinity(), in_int);
    if (in_int) {
      model.vars[id].lb = 0.0;
      model.vars[id].ub = 1.0;
    }
    col_ids[name] = id;
    return id;
  };

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '*') continue;
    if (line[0] != ' ' && line[0] != '\t') {
      std::istringstream hs(line);
      hs >> section;
      if (section == "ENDATA") break;
      objsense_pending = section == "OBJSENSE";
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> f;
    std::string tok;
    while (ls >> tok) f.push_back(tok);
    if (f.empty()) continue;

    if (objsense_pending) {
      maximize = f[0] == "MAX" || f[0] == "MAXIMIZE";
      objsense_pending = false;
      continue;
    }
    if (section == "ROWS") {
      if (f.size() < 2) throw IoError("MPS: bad ROWS line");
      if (f[0] == "N") continue;  // objective row
      Relation rel;
      if (f[0] == "E") rel = Relation::Eq;
      else if (f[0] == "L") rel = Relation::Le;
      else throw IoError("MPS: unsupported row type " + f[0]);
      row_ids[f[1]] = static_cast<std::uint32_t>(model.rows.size());
      model.rows.push_back(LinearRow{f[1], {}, {}, rel, 0.0});
    } else if (section == "COLUMNS") {
      if (f.size() >= 3 && f[1] == "'MARKER'") {
        in_int = f[2] == "'INTORG'";
        continue;
      }
      for (std::size_t i = 1; i + 1 < f.size(); i += 2) {
        const std::uint32_t col = get_col(f[0]);
        const double coef = std::stod(f[i + 1]);
        if (f[i] == "OBJ") {
          model.objective[col] = coef;
        } else {
          auto it = row_ids.find(f[i]);
          if (it == row_ids.end()) throw IoError("MPS: unknown row " + f[i]);
          model.rows[it->second].idx.push_back(col);
          model.rows[it->second].coef.push_back(coef);
        }
      }
    } else if (section == "RHS") {
      for (std::size_t i = 1; i + 1 < f.size(); i += 2) {
        auto it = row_ids.find(f[i]);
        if (it == row_ids.end()) throw IoError("MPS: unknown RHS row " + f[i]);
        model.rows[it->second].rhs = std::stod(f[i + 1]);
      }
    } else if (section == "BOUNDS") {
      if (f.size() < 3) throw IoError("MPS: bad BOUNDS line");
      const std::string& type = f[0];
      auto it = col_ids.find(f[2]);
      if (it == col_ids.end()) throw IoError("MPS: bound on unknown column");
      Variable& var = model.vars[it->second];
      if (type == "BV") {
        var.lb = 0.0;
        var.ub = 1.0;
        var.integral = true;
      } else if (type == "UP") {
        var.ub = std::stod(f[3]);
      } else if (type == "LO") {
        var.lb = std::stod(f[3]);
      } else if (type == "FX") {
        var.lb = var.ub = std::stod(f[3]);
      } else {
        throw IoError("MPS: unsupported bound type " + type);
      }
    }
  }
  model.sense = maximize ? Sense::Maximize : Sense::Minimize;
  // Columns never mentioned in BOUNDS keep [0, inf); continuous CC-SSP
  // exports always carry UP rows, so this only affects foreign files.
  return model;
}

ModelIR mps_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_mps(is);
}

void write_lp_format(const ModelIR& model, std::ostream& os) {
  os << (model.sense == Sense::Maximize ? "Maximize" : "Minimize") << "\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < model.vars.size(); ++j) {
    const double c = model.objective[j];
    if (c == 0.0) continue;
    os << (c >= 0 && !first ? " + " : " ") << (c < 0 ? "- " : "")
       << num(std::abs(c)) << " " << model.vars[j].name;
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const auto& row : model.rows) {
    os << " " << row.name << ":";
    bool f2 = true;
    for (std::size_t t = 0; t < row.idx.size(); ++t) {
      const double c = row.coef[t];
      os << (c >= 0 && !f2 ? " + " : " ") << (c < 0 ? "- " : "")
         << num(std::abs(c)) << " " << model.vars[row.idx[t]].name;
      f2 = false;
    }
    os << (row.rel == Relation::Eq ? " = " : " <= ") << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& var : model.vars) {
    if (var.lb == var.ub) {
      os << " " << var.name << " = " << num(var.lb) << "\n";
    } else if (std::isfinite(var.ub)) {
      os << " " << num(var.lb) << " <= " << var.name << " <= " << num(var.ub)
         << "\n";
    } else if (var.lb != 0.0) {
      os << " " << var.name << " >= " << num(var.lb) << "\n";
    }
  }
  bool any_bin = false;
  for (const auto& var : model.vars) {
    if (var.integral) {
      if (!any_bin) {
        os << "Binaries\n";
        any_bin = true;
      }
      os << " " << var.name << "\n";
    }
  }
  os << "End\n";
}

}  // namespace ccssp
