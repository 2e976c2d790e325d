#include "hgnids/flow.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hgnids/error.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

namespace {

constexpr std::size_t kMaxMessages = 20;

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

enum class FieldStatus { Ok, Missing, NonFinite, Unparseable };

}  // namespace

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::Benign: return "BENIGN";
    case LabelKind::PortScan: return "PORT_SCAN";
    case LabelKind::OtherAttack: return "OTHER_ATTACK";
  }
  return "UNKNOWN";
}

ActivityLabel ActivityLabel::parse(std::string_view text) {
  const std::string_view trimmed = text::trim(text);
  const std::string lower = text::to_lower(trimmed);
  if (lower == "benign") return benign();
  if (lower == "portscan" || lower == "port_scan" || lower == "port scan") return port_scan();
  return other(std::string(trimmed));
}

std::string ActivityLabel::to_string() const {
  switch (kind) {
    case LabelKind::Benign: return "BENIGN";
    case LabelKind::PortScan: return "PortScan";
    case LabelKind::OtherAttack: return name;
  }
  return name;
}

std::array<double, kNrfWidth> nrf_values(const FlowRecord& rec) {
  return {static_cast<double>(rec.protocol), rec.flow_duration,  rec.tot_fwd_pkts,
          rec.tot_bwd_pkts,                  rec.tot_fwd_bytes,  rec.tot_bwd_bytes,
          rec.flow_bytes_per_s,              rec.flow_pkts_per_s, rec.down_up_ratio};
}

void set_nrf_values(FlowRecord& rec, const std::array<double, kNrfWidth>& v) {
  rec.protocol = static_cast<int>(std::lround(v[0]));
  rec.flow_duration = v[1];
  rec.tot_fwd_pkts = v[2];
  rec.tot_bwd_pkts = v[3];
  rec.tot_fwd_bytes = v[4];
  rec.tot_bwd_bytes = v[5];
  rec.flow_bytes_per_s = v[6];
  rec.flow_pkts_per_s = v[7];
  rec.down_up_ratio = v[8];
}

bool is_valid_protocol(int protocol) { return protocol == 0 || protocol == 6 || protocol == 17; }

std::vector<std::pair<std::string, std::string>> ColumnMap::entries() const {
  return {{"src_ip", src_ip},
          {"src_port", src_port},
          {"dst_ip", dst_ip},
          {"dst_port", dst_port},
          {"protocol", protocol},
          {"flow_duration", flow_duration},
          {"tot_fwd_pkts", tot_fwd_pkts},
          {"tot_bwd_pkts", tot_bwd_pkts},
          {"tot_fwd_bytes", tot_fwd_bytes},
          {"tot_bwd_bytes", tot_bwd_bytes},
          {"flow_bytes_per_s", flow_bytes_per_s},
          {"flow_pkts_per_s", flow_pkts_per_s},
          {"down_up_ratio", down_up_ratio},
          {"label", label}};
}

void ColumnMap::set(std::string_view field, std::string header) {
  std::string* slots[] = {&src_ip,        &src_port,      &dst_ip,           &dst_port,
                          &protocol,      &flow_duration, &tot_fwd_pkts,     &tot_bwd_pkts,
                          &tot_fwd_bytes, &tot_bwd_bytes, &flow_bytes_per_s, &flow_pkts_per_s,
                          &down_up_ratio, &label};
  const auto keys = entries();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].first == field) {
      *slots[i] = std::move(header);
      return;
    }
  }
  throw UsageError("unknown column-map field '" + std::string(field) + "'");
}

ColumnMap ColumnMap::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read column map " + path.string());
  ColumnMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected 'field = header'");
    }
    map.set(text::trim(t.substr(0, eq)), std::string(text::trim(t.substr(eq + 1))));
  }
  return map;
}

std::string CleaningReport::to_text() const {
  std::ostringstream out;
  out << "rows_read: " << rows_read << '\n'
      << "kept: " << kept << '\n'
      << "dropped: " << dropped() << '\n'
      << "  negative_duration: " << negative_duration << '\n'
      << "  missing_value: " << missing_value << '\n'
      << "  non_finite: " << non_finite << '\n'
      << "  unparseable: " << unparseable << '\n';
  for (const auto& m : messages) out << "  ! " << m << '\n';
  return out.str();
}

std::string CleaningReport::to_csv() const {
  std::ostringstream out;
  out << "metric,count\n"
      << "rows_read," << rows_read << '\n'
      << "kept," << kept << '\n'
      << "dropped," << dropped() << '\n'
      << "negative_duration," << negative_duration << '\n'
      << "missing_value," << missing_value << '\n'
      << "non_finite," << non_finite << '\n'
      << "unparseable," << unparseable << '\n';
  return out.str();
}

IngestResult ingest_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return ingest_csv(in, columns);
}

IngestResult ingest_csv(std::istream& in, const ColumnMap& columns) {
  IngestResult result;
  result.dataset.provenance = Provenance::Ingested;

  std::string line;
  if (!std::getline(in, line)) throw DataError("input has no header row");
  const auto header = split_csv_line(line);

  // Column index per logical field, in ColumnMap::entries() order.
  const auto fields = columns.entries();
  std::vector<std::size_t> col(fields.size());
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const std::string_view want = text::trim(fields[f].second);
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (text::trim(header[h]) == want) {
        found = h;
        break;
      }
    }
    if (found == header.size()) {
      throw DataError("header is missing column '" + std::string(want) + "' (field " +
                      fields[f].first + ")");
    }
    col[f] = found;
  }
  std::size_t needed = 0;
  for (auto c : col) needed = std::max(needed, c + 1);

  enum Field { SrcIp, SrcPort, DstIp, DstPort, Proto, Dur, FwdP, BwdP, FwdB, BwdB, Bps, Pps, Ratio, Label };

  CleaningReport& report = result.report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ++report.rows_read;

    const auto cells = split_csv_line(line);
    if (cells.size() < needed) {
      ++report.unparseable;
      if (report.messages.size() < kMaxMessages) {
        report.messages.push_back("line " + std::to_string(line_no) + ": expected at least " +
                                  std::to_string(needed) + " fields, got " +
                                  std::to_string(cells.size()));
      }
      continue;
    }
    const auto cell = [&](Field f) { return text::trim(cells[col[f]]); };

    bool missing = false;
    bool non_finite = false;
    std::string bad;  // first unparseable field
    FlowRecord rec;

    const auto mark_bad = [&](std::string_view what) {
      if (bad.empty()) bad = std::string(what);
    };

    rec.src_ip = std::string(cell(SrcIp));
    rec.dst_ip = std::string(cell(DstIp));
    if (rec.src_ip.empty() || rec.dst_ip.empty()) missing = true;

    const auto read_port = [&](Field f, std::uint16_t& out, std::string_view name) {
      const auto c = cell(f);
      if (c.empty()) {
        missing = true;
        return;
      }
      const auto v = text::parse_int(c);
      if (!v || *v < 0 || *v > 65535) {
        mark_bad(name);
        return;
      }
      out = static_cast<std::uint16_t>(*v);
    };
    read_port(SrcPort, rec.src_port, "src_port");
    read_port(DstPort, rec.dst_port, "dst_port");

    if (const auto c = cell(Proto); c.empty()) {
      missing = true;
    } else if (const auto v = text::parse_int(c); !v || !is_valid_protocol(static_cast<int>(*v))) {
      mark_bad("protocol");
    } else {
      rec.protocol = static_cast<int>(*v);
    }

    const std::pair<Field, double FlowRecord::*> numeric[] = {
        {Dur, &FlowRecord::flow_duration},     {FwdP, &FlowRecord::tot_fwd_pkts},
        {BwdP, &FlowRecord::tot_bwd_pkts},     {FwdB, &FlowRecord::tot_fwd_bytes},
        {BwdB, &FlowRecord::tot_bwd_bytes},    {Bps, &FlowRecord::flow_bytes_per_s},
        {Pps, &FlowRecord::flow_pkts_per_s},   {Ratio, &FlowRecord::down_up_ratio}};
    for (const auto& [f, member] : numeric) {
      const auto c = cell(f);
      if (c.empty()) {
        missing = true;
        continue;
      }
      const auto v = text::parse_double(c);
      if (!v) {
        mark_bad(fields[f].first);
        continue;
      }
      if (std::isnan(*v)) {
        missing = true;
      } else if (std::isinf(*v)) {
        non_finite = true;
      }
      rec.*member = *v;
    }

    const auto label = cell(Label);
    if (label.empty()) {
      missing = true;
    } else {
      rec.label = ActivityLabel::parse(label);
    }

    if (!bad.empty()) {
      ++report.unparseable;
      if (report.messages.size() < kMaxMessages) {
        report.messages.push_back("line " + std::to_string(line_no) + ": unparseable " + bad);
      }
    } else if (missing) {
      ++report.missing_value;
    } else if (non_finite) {
      ++report.non_finite;
    } else if (rec.flow_duration < 0.0) {
      ++report.negative_duration;
    } else {
      ++report.kept;
      result.dataset.records.push_back(std::move(rec));
    }
  }
  return result;
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  const ColumnMap canonical;
  bool first = true;
  for (const auto& [key, header] : canonical.entries()) {
    if (!first) out << ',';
    first = false;
    out << header;
  }
  out << '\n';
  using text::format_double;
  for (const auto& r : dataset.records) {
    out << r.src_ip << ',' << r.src_port << ',' << r.dst_ip << ',' << r.dst_port << ','
        << r.protocol << ',' << format_double(r.flow_duration) << ','
        << format_double(r.tot_fwd_pkts) << ',' << format_double(r.tot_bwd_pkts) << ','
        << format_double(r.tot_fwd_bytes) << ',' << format_double(r.tot_bwd_bytes) << ','
        << format_double(r.flow_bytes_per_s) << ',' << format_double(r.flow_pkts_per_s) << ','
        << format_double(r.down_up_ratio) << ',';
    const std::string label = r.label.to_string();
    if (label.find_first_of(",\"") != std::string::npos) {
      out << '"';
      for (char c : label) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << label;
    }
    out << '\n';
  }
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(dataset, out);
}

std::map<LabelKind, double> class_balance(const Dataset& dataset) {
  if (dataset.empty()) throw DataError("class_balance: empty dataset");
  std::map<LabelKind, std::size_t> counts;
  for (const auto& r : dataset.records) ++counts[r.label.kind];
  std::map<LabelKind, double> fractions;
  const double n = static_cast<double>(dataset.size());
  for (const auto& [kind, c] : counts) fractions[kind] = static_cast<double>(c) / n;
  return fractions;
}

}  // namespace hgnids
