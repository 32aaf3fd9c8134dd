#include "vortexlab/field_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vortexlab/error.hpp"

namespace vortexlab {

std::string to_string(Form form) { return form == Form::full ? "full" : "regular"; }

Form form_from_string(const std::string& s) {
  if (s == "full") return Form::full;
  if (s == "regular") return Form::regular;
  throw Error("unknown field form '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw Error("malformed number '" + s + "'");
  return v;
}

void write_field_pair(std::ostream& out, const FieldPair& pair, double l1, double l2) {
  const Field& a = pair.u[0];
  out << "vortexlab-field 1\n"
      << "n1 " << a.n1() << "\n"
      << "n2 " << a.n2() << "\n"
      << "L1 " << format_double(l1) << "\n"
      << "L2 " << format_double(l2) << "\n"
      << "eps " << format_double(pair.eps) << "\n"
      << "form " << to_string(pair.form) << "\n"
      << "components u1 u2\n"
      << "values\n";
  for (const Field& f : pair.u)
    for (int i = 0; i < f.n1(); ++i) {
      for (int j = 0; j < f.n2(); ++j) {
        if (j) out << ' ';
        out << format_double(f(i, j));
      }
      out << '\n';
    }
}

void write_field_pair(const std::filesystem::path& path, const FieldPair& pair, double l1, double l2) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_field_pair(out, pair, l1, l2);
}

StoredPair read_field_pair(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "vortexlab-field 1") throw Error("not a vortexlab field file");
  StoredPair s;
  int n1 = 0, n2 = 0;
  bool seen_form = false;
  while (std::getline(in, line) && line != "values") {
    std::istringstream ls(line);
    std::string key, value;
    ls >> key >> value;
    if (key == "n1") n1 = std::stoi(value);
    else if (key == "n2") n2 = std::stoi(value);
    else if (key == "L1") s.l1 = parse_double(value);
    else if (key == "L2") s.l2 = parse_double(value);
    else if (key == "eps") s.pair.eps = parse_double(value);
    else if (key == "form") { s.pair.form = form_from_string(value); seen_form = true; }
    else if (key == "components") continue;
    else throw Error("unknown field header key '" + key + "'");
  }
  if (line != "values" || n1 <= 0 || n2 <= 0 || !seen_form) throw Error("incomplete field header");
  for (Field& f : s.pair.u) {
    f = Field(n1, n2);
    for (int i = 0; i < n1; ++i) {
      if (!std::getline(in, line)) throw Error("field file truncated");
      std::istringstream ls(line);
      std::string tok;
      int j = 0;
      while (ls >> tok) {
        if (j >= n2) throw Error("field row too long");
        f(i, j++) = parse_double(tok);
      }
      if (j != n2) throw Error("field row too short");
    }
  }
  return s;
}

StoredPair read_field_pair(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_field_pair(in);
}

}  // namespace vortexlab
