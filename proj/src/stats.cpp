#include "surpdec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "surpdec/error.hpp"
#include "surpdec/report.hpp"

namespace surpdec {

namespace {

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "no coefficient named '" + std::string(name) + "'");
}

}  // namespace

double RegressionResult::coefficient(std::string_view name) const { return coefficients[index_of(names, name)]; }
double RegressionResult::t_value(std::string_view name) const { return t_values[index_of(names, name)]; }

RegressionResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, std::vector<std::string> names) {
  const auto n = static_cast<std::size_t>(design.rows());
  const auto p = static_cast<std::size_t>(design.cols());
  if (static_cast<std::size_t>(y.size()) != n) throw Error(ErrorCode::InvalidArgument, "y and X differ in rows");
  if (names.size() != p) throw Error(ErrorCode::InvalidArgument, "one name per design column required");
  if (n <= p) throw Error(ErrorCode::RankDeficient, "need more observations than predictors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (static_cast<std::size_t>(qr.rank()) < p) throw Error(ErrorCode::RankDeficient, "design is not full column rank");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx_inv = (design.transpose() * design).inverse();
  const double mean_y = y.mean();
  const double tss = (y.array() - mean_y).matrix().squaredNorm();

  RegressionResult r;
  r.names = std::move(names);
  r.n = n;
  r.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(jj, jj)));
    const double t = beta(jj) / se;
    r.coefficients.push_back(beta(jj));
    r.std_errors.push_back(se);
    r.t_values.push_back(t);
    r.p_values.push_back(std::erfc(std::abs(t) / std::sqrt(2.0)));
  }
  return r;
}

RegressionResult ols_fit(std::span<const double> y,
                         const std::vector<std::pair<std::string, std::vector<double>>>& predictors) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(predictors.size() + 1));
  std::vector<std::string> names{"(Intercept)"};
  design.col(0).setOnes();
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    const auto& [name, column] = predictors[k];
    if (column.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "predictor '" + name + "' length differs");
    names.push_back(name);
    for (Eigen::Index i = 0; i < n; ++i) design(i, static_cast<Eigen::Index>(k + 1)) = column[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
  return ols_fit(yv, design, std::move(names));
}

SignReport check_sign_predictions(std::span<const double> n400, std::span<const double> p600,
                                  std::span<const double> surprisal) {
  if (n400.size() != p600.size() || n400.size() != surprisal.size()) {
    throw Error(ErrorCode::InvalidArgument, "N400, P600 and surprisal columns differ in length");
  }
  if (n400.size() < 10) throw Error(ErrorCode::InvalidArgument, "sign checks need at least 10 observations");
  const std::vector<double> n(n400.begin(), n400.end());
  const std::vector<double> p(p600.begin(), p600.end());
  const std::vector<double> s(surprisal.begin(), surprisal.end());

  SignReport report;
  report.fits.push_back(ols_fit(s, {{"N400", n}, {"P600", p}}));
  report.fits.push_back(ols_fit(n, {{"Surprisal", s}, {"P600", p}}));
  report.fits.push_back(ols_fit(p, {{"Surprisal", s}, {"N400", n}}));

  struct Expected {
    std::size_t fit;
    const char* model;
    const char* predictor;
    int sign;
  };
  static constexpr Expected kExpected[] = {
      {0, "Surprisal ~ N400 + P600", "N400", +1}, {0, "Surprisal ~ N400 + P600", "P600", +1},
      {1, "N400 ~ Surprisal + P600", "Surprisal", +1}, {1, "N400 ~ Surprisal + P600", "P600", -1},
      {2, "P600 ~ Surprisal + N400", "Surprisal", +1}, {2, "P600 ~ Surprisal + N400", "N400", -1},
  };
  report.all_match = true;
  for (const auto& e : kExpected) {
    SignCheck c;
    c.model = e.model;
    c.predictor = e.predictor;
    c.expected_sign = e.sign;
    c.coefficient = report.fits[e.fit].coefficient(e.predictor);
    c.t_value = report.fits[e.fit].t_value(e.predictor);
    c.matches = (c.coefficient > 0.0 && e.sign > 0) || (c.coefficient < 0.0 && e.sign < 0);
    report.all_match = report.all_match && c.matches;
    report.checks.push_back(c);
  }
  return report;
}

std::string sign_report_text(const SignReport& report) {
  std::ostringstream out;
  out << "model,predictor,expected_sign,coefficient,t_value,p_value_normal_approx,matches\n";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const auto& c = report.checks[i];
    const auto& fit = report.fits[i / 2];
    const double p = fit.p_values[index_of(fit.names, c.predictor)];
    out << c.model << ',' << c.predictor << ',' << (c.expected_sign > 0 ? "+" : "-") << ','
        << format_number(c.coefficient) << ',' << format_number(c.t_value) << ',' << format_number(p) << ','
        << (c.matches ? "yes" : "no") << '\n';
  }
  out << "# all_signs_match," << (report.all_match ? "yes" : "no") << '\n';
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<double> zscores(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  std::vector<double> out;
  for (double x : xs) out.push_back(sd > 0.0 ? (x - mean) / sd : 0.0);
  return out;
}

}  // namespace

std::vector<ErpTrial> parse_erp_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"subject", "item_id", "n400_amp", "p600_amp"}) {
    if (!col.count(required)) throw Error(ErrorCode::SchemaError, std::string("ERP file lacks column ") + required);
  }
  std::vector<ErpTrial> trials;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::SchemaError, "ERP row " + std::to_string(line_no) + " has the wrong field count");
    }
    ErpTrial t;
    t.subject = f[col["subject"]];
    t.item_id = f[col["item_id"]];
    try {
      t.n400_amp = std::stod(f[col["n400_amp"]]);
      t.p600_amp = std::stod(f[col["p600_amp"]]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError, "ERP row " + std::to_string(line_no) + " has a non-numeric amplitude");
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

SignData parse_sign_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"n400", "p600", "surprisal"}) {
    if (!col.count(required)) throw Error(ErrorCode::SchemaError, std::string("data file lacks column ") + required);
  }
  SignData data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::SchemaError, "data row " + std::to_string(line_no) + " has the wrong field count");
    }
    try {
      data.n400.push_back(std::stod(f[col["n400"]]));
      data.p600.push_back(std::stod(f[col["p600"]]));
      data.surprisal.push_back(std::stod(f[col["surprisal"]]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError, "data row " + std::to_string(line_no) + " has a non-numeric value");
    }
  }
  return data;
}

std::string export_long_format(std::span<const DecompositionResult> results,
                               const std::optional<std::vector<ErpTrial>>& trials) {
  std::unordered_map<std::string, const DecompositionResult*> by_item;
  for (const auto& r : results) by_item.emplace(r.item_id, &r);

  struct Row {
    const ErpTrial* trial;
    const DecompositionResult* result;
  };
  std::vector<Row> rows;
  if (trials) {
    std::set<std::string> missing;
    for (const auto& t : *trials) {
      auto it = by_item.find(t.item_id);
      if (it == by_item.end()) {
        missing.insert(t.item_id);
        continue;
      }
      rows.push_back({&t, it->second});
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::JoinError, "ERP trials reference items without model results: " + list);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.trial->subject != b.trial->subject) return a.trial->subject < b.trial->subject;
      return a.trial->item_id < b.trial->item_id;
    });
  } else {
    for (const auto& r : results) rows.push_back({nullptr, &r});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.result->item_id < b.result->item_id; });
  }

  std::vector<double> a, b, v, s;
  for (const auto& row : rows) {
    a.push_back(row.result->shallow);
    b.push_back(row.result->deep);
    v.push_back(row.result->veridical);
    s.push_back(row.result->lm_surprisal);
  }
  const auto az = zscores(a), bz = zscores(b), vz = zscores(v), sz = zscores(s);

  std::ostringstream out;
  if (trials) out << "subject,";
  out << "item_id,condition,A,B,veridical,lm_surprisal,";
  if (trials) out << "n400_amp,p600_amp,";
  out << "A_z,B_z,veridical_z,lm_surprisal_z\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = *rows[i].result;
    if (trials) out << csv_field(rows[i].trial->subject) << ',';
    out << csv_field(r.item_id) << ',' << csv_field(r.condition) << ',' << format_number(r.shallow) << ','
        << format_number(r.deep) << ',' << format_number(r.veridical) << ',' << format_number(r.lm_surprisal) << ',';
    if (trials) out << format_number(rows[i].trial->n400_amp) << ',' << format_number(rows[i].trial->p600_amp) << ',';
    out << format_number(az[i]) << ',' << format_number(bz[i]) << ',' << format_number(vz[i]) << ','
        << format_number(sz[i]) << '\n';
  }
  return out.str();
}

}  // namespace surpdec
