// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "nrse/harness.hpp"

namespace nrse::harness {

namespace {

std::vector<std::string> split_csv_line(const std::string &line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  require(!quoted, "records.csv: unterminated quote");
  out.push_back(cur);
  return out;
}

double to_double(const std::string &s, std::size_t line)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) { return v; }
  } catch (const std::exception &) {
  }
  throw Error("records.csv line " + std::to_string(line) + ": bad number '" + s + "'");
}

std::string fmt(const std::optional<double> &v, const char *spec = "%.4f", bool sign = false)
{
  if (!v) { return ""; }
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, *v);
  return (sign && *v >= 0.0 ? "+" : "") + std::string(buf);
}

} // namespace

RecordTable read_records_csv(const fs::path &path)
{
  std::ifstream in(path);
  require(bool(in), "cannot open " + path.string());
  std::string line;
  require(bool(std::getline(in, line)), path.string() + ": empty file");
  const std::vector<std::string> head = split_csv_line(line);
  const std::vector<std::string> fixed{"utterance", "room", "noise", "snr_db", "stoi_target", "snr_measured_db", "method"};
  require(head.size() >= fixed.size() + 1 && std::equal(fixed.begin(), fixed.end(), head.begin()) &&
              head.back() == "param_hash",
          path.string() + ": unexpected header");
  RecordTable t;
  t.metric_names.assign(head.begin() + std::ptrdiff_t(fixed.size()), head.end() - 1);
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) { continue; }
    const auto f = split_csv_line(line);
    require(f.size() == head.size(), path.string() + " line " + std::to_string(ln) + ": wrong field count");
    RunRecord r;
    r.utterance = f[0];
    r.room = f[1];
    r.noise = f[2];
    r.snr_db = to_double(f[3], ln);
    if (!f[4].empty()) { r.stoi_target = to_double(f[4], ln); }
    r.snr_measured_db = to_double(f[5], ln);
    r.method = f[6];
    for (std::size_t k = 0; k < t.metric_names.size(); ++k) {
      const std::string &v = f[fixed.size() + k];
      r.scores.push_back(v.empty() ? std::nullopt : std::optional<double>(to_double(v, ln)));
    }
    r.param_hash = f.back();
    t.records.push_back(std::move(r));
  }
  return t;
}

Report summarize(const RecordTable &table)
{
  require(!table.records.empty(), "report: no records");
  Report rep;
  rep.metric_names = table.metric_names;
  const std::size_t nm = table.metric_names.size();
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> sum;
  std::vector<std::vector<Index>> cnt;
  for (const auto &r : table.records) {
    auto [it, fresh] = index.try_emplace(r.method, rep.methods.size());
    if (fresh) {
      rep.methods.push_back({r.method, 0, {}, {}});
      sum.emplace_back(nm, 0.0);
      cnt.emplace_back(nm, 0);
    }
    const std::size_t m = it->second;
    rep.methods[m].count += 1;
    for (std::size_t k = 0; k < nm; ++k) {
      if (!r.scores[k]) { continue; }
      sum[m][k] += *r.scores[k];
      cnt[m][k] += 1;
    }
  }
  for (std::size_t m = 0; m < rep.methods.size(); ++m) {
    for (std::size_t k = 0; k < nm; ++k) {
      rep.methods[m].mean.push_back(cnt[m][k] ? std::optional<double>(sum[m][k] / double(cnt[m][k])) : std::nullopt);
    }
  }
  const auto unp = index.find("unp");
  for (auto &ms : rep.methods) {
    for (std::size_t k = 0; k < nm; ++k) {
      std::optional<double> d;
      if (unp != index.end() && ms.mean[k] && rep.methods[unp->second].mean[k]) {
        d = *ms.mean[k] - *rep.methods[unp->second].mean[k];
      }
      ms.delta.push_back(d);
    }
  }
  return rep;
}

void write_report_markdown(std::ostream &os, const Report &r)
{
  os << "| method | n |";
  for (const auto &m : r.metric_names) { os << ' ' << m << " | delta " << m << " |"; }
  os << "\n|---|---|";
  for (std::size_t k = 0; k < r.metric_names.size(); ++k) { os << "---|---|"; }
  os << '\n';
  for (const auto &m : r.methods) {
    os << "| " << m.method << " | " << m.count << " |";
    for (std::size_t k = 0; k < r.metric_names.size(); ++k) {
      os << ' ' << fmt(m.mean[k]) << " | " << fmt(m.delta[k], "%.4f", true) << " |";
    }
    os << '\n';
  }
}

Report report(const fs::path &run_dir)
{
  const fs::path records = run_dir / "records.csv";
  require(fs::is_regular_file(records), "report: no records.csv in " + run_dir.string());
  const RecordTable table = read_records_csv(records);
  const Report rep = summarize(table);

  {
    std::ofstream md(run_dir / "report.md");
    md << "# Run summary\n\nMeans over all records; delta is the method mean minus the unp mean.\n\n";
    write_report_markdown(md, rep);
  }
  {
    std::ofstream csv(run_dir / "report.csv");
    csv << "method,metric,count,mean,delta_vs_unp\n";
    for (const auto &m : rep.methods) {
      for (std::size_t k = 0; k < rep.metric_names.size(); ++k) {
        csv << m.method << ',' << rep.metric_names[k] << ',' << m.count << ',' << fmt(m.mean[k], "%.17g") << ','
            << fmt(m.delta[k], "%.17g") << '\n';
      }
    }
  }
  // One column per method, one row per record index: gnuplot box-plot input.
  for (std::size_t k = 0; k < rep.metric_names.size(); ++k) {
    std::vector<std::vector<std::optional<double>>> cols(rep.methods.size());
    for (const auto &r : table.records) {
      for (std::size_t m = 0; m < rep.methods.size(); ++m) {
        if (rep.methods[m].method == r.method) { cols[m].push_back(r.scores[k]); }
      }
    }
    std::size_t rows = 0;
    for (const auto &c : cols) { rows = std::max(rows, c.size()); }
    std::ofstream dat(run_dir / ("box_" + rep.metric_names[k] + ".dat"));
    dat << '#';
    for (const auto &m : rep.methods) { dat << ' ' << m.method; }
    dat << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t m = 0; m < cols.size(); ++m) {
        dat << (m ? " " : "") << (i < cols[m].size() && cols[m][i] ? fmt(cols[m][i], "%.9g") : "NaN");
      }
      dat << '\n';
    }
  }
  return rep;
}

} // namespace nrse::harness
