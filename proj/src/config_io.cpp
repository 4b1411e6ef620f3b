#include "privdet/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace privdet {

namespace {

void fail(const std::string& path, int lineno, const std::string& msg) {
  throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                              msg);
}

struct Parser {
  std::string path;
  std::vector<std::pair<int, std::string>> lines;  // (lineno, content)
  std::size_t pos = 0;

  bool done() const { return pos >= lines.size(); }
  const std::string& peek() const { return lines[pos].second; }
  int lineno() const {
    return done() ? (lines.empty() ? 0 : lines.back().first) : lines[pos].first;
  }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (done()) fail(path, lineno(), "unexpected end of matrix");
      std::istringstream row(lines[pos].second);
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> m(r, c))) {
          fail(path, lines[pos].first, "matrix row too short");
        }
      }
      double extra;
      if (row >> extra) fail(path, lines[pos].first, "matrix row too long");
      ++pos;
    }
    return m;
  }
};

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_scenario: cannot open " + path);

  Parser p;
  p.path = path;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream probe(raw);
    std::string word;
    if (probe >> word) p.lines.emplace_back(lineno, raw);
  }

  Scenario sc;
  int nsub = 0;
  std::map<int, SubsystemModel> subsystems;
  std::map<int, PrivacyMechanism> mechanisms, mechanisms_alt;

  while (!p.done()) {
    std::istringstream line(p.peek());
    std::string tok;
    line >> tok;

    if (tok == "subsystems") {
      if (!(line >> nsub) || nsub < 1) fail(path, p.lineno(), "bad subsystem count");
      ++p.pos;
    } else if (tok == "horizon") {
      int t;
      if (!(line >> t) || t < 1) fail(path, p.lineno(), "bad horizon");
      sc.horizon = t;
      ++p.pos;
    } else if (tok == "p_false_alarm") {
      double v;
      if (!(line >> v) || !(v > 0.0 && v < 1.0)) {
        fail(path, p.lineno(), "bad p_false_alarm");
      }
      sc.p_false_alarm = v;
      ++p.pos;
    } else if (tok == "[subsystem" || tok == "[mechanism" ||
               tok == "[mechanism2") {
      int k;
      if (!(line >> k) || k < 1) fail(path, p.lineno(), "bad section index");
      const int header_line = p.lineno();
      ++p.pos;
      // Collect "name rows cols" + body until the next section.
      std::map<std::string, Matrix> mats;
      while (!p.done() && p.peek().find('[') == std::string::npos) {
        std::istringstream decl(p.peek());
        std::string name;
        Eigen::Index rows, cols;
        if (!(decl >> name >> rows >> cols) || rows < 0 || cols < 0) {
          fail(path, p.lineno(), "expected 'name rows cols'");
        }
        ++p.pos;
        mats[name] = p.matrix(rows, cols);
      }
      auto take = [&](const char* name, bool required) -> Matrix {
        auto it = mats.find(name);
        if (it == mats.end()) {
          if (required) {
            fail(path, header_line, std::string("missing matrix ") + name);
          }
          return Matrix();
        }
        Matrix m = it->second;
        mats.erase(it);
        return m;
      };
      if (tok == "[subsystem") {
        SubsystemModel sub;
        sub.A = take("A", true);
        sub.B = take("B", true);
        sub.B_a = take("Ba", false);
        if (sub.B_a.size() == 0) sub.B_a = Matrix::Zero(sub.A.rows(), 0);
        sub.C = take("C", true);
        sub.sigma_w = take("Sigma_w", true);
        sub.sigma_v = take("Sigma_v", true);
        sub.sigma_x0 = take("Sigma_x0", true);
        subsystems[k] = std::move(sub);
      } else {
        PrivacyMechanism mech;
        mech.S = take("S", true);
        mech.sigma_r = take("Sigma_r", mech.S.rows() > 0);
        if (mech.S.rows() == 0) mech.sigma_r = Matrix::Zero(0, 0);
        (tok == "[mechanism" ? mechanisms : mechanisms_alt)[k] =
            std::move(mech);
      }
      if (!mats.empty()) {
        fail(path, header_line, "unknown matrix '" + mats.begin()->first + "'");
      }
    } else if (tok == "[attack]") {
      ++p.pos;
      AttackSignal atk;
      bool have_values = false;
      while (!p.done() && p.peek().find('[') == std::string::npos) {
        std::istringstream decl(p.peek());
        std::string name;
        decl >> name;
        if (name == "subsystem") {
          int k;
          if (!(decl >> k) || k < 1) fail(path, p.lineno(), "bad attack subsystem");
          atk.subsystem = static_cast<std::size_t>(k - 1);
          ++p.pos;
        } else if (name == "values") {
          Eigen::Index rows, cols;
          if (!(decl >> rows >> cols) || rows < 1 || cols < 1) {
            fail(path, p.lineno(), "bad attack values shape");
          }
          ++p.pos;
          const Matrix m = p.matrix(rows, cols);
          for (Eigen::Index r = 0; r < rows; ++r) {
            atk.values.push_back(m.row(r).transpose());
          }
          have_values = true;
        } else {
          fail(path, p.lineno(), "unknown attack field '" + name + "'");
        }
      }
      if (!have_values) fail(path, p.lineno(), "attack without values");
      sc.attack = std::move(atk);
    } else {
      fail(path, p.lineno(), "unknown directive '" + tok + "'");
    }
  }

  if (nsub == 0) nsub = static_cast<int>(subsystems.size());
  if (nsub == 0) throw std::invalid_argument(path + ": no subsystems");
  for (int k = 1; k <= nsub; ++k) {
    auto it = subsystems.find(k);
    if (it == subsystems.end()) {
      throw std::invalid_argument(path + ": missing [subsystem " +
                                  std::to_string(k) + "]");
    }
    sc.system.subsystems.push_back(std::move(it->second));
  }
  auto collect = [&](std::map<int, PrivacyMechanism>& src,
                     std::vector<PrivacyMechanism>& dst) {
    if (src.empty()) return;
    for (int k = 2; k <= nsub; ++k) {
      auto it = src.find(k);
      if (it == src.end()) {
        throw std::invalid_argument(path + ": missing mechanism for subsystem " +
                                    std::to_string(k));
      }
      dst.push_back(std::move(it->second));
    }
  };
  collect(mechanisms, sc.mechanisms);
  collect(mechanisms_alt, sc.mechanisms_alt);
  sc.system.validate();
  return sc;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  bool header_written = false;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    throw std::invalid_argument("CsvWriter: cannot open " + path);
  }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::metadata(const std::string& key, const std::string& value) {
  impl_->out << "# " << key << " " << value << "\n";
}

void CsvWriter::metadata(const std::string& key, double value) {
  metadata(key, format_double(value));
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    impl_->out << (i ? "," : "") << columns[i];
  }
  impl_->out << "\n";
  impl_->header_written = true;
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    impl_->out << (i ? "," : "") << format_double(values[i]);
  }
  impl_->out << "\n";
}

}  // namespace privdet
