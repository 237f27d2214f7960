#include "uwh/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "uwh/canonical.hpp"
#include "uwh/csv.hpp"
#include "uwh/errors.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"

namespace uwh {

namespace fs = std::filesystem;

namespace {

// Distributions are hand-rolled: the standard ones are not specified
// bit-for-bit across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  double normal(double mean, double sd) {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kDepartments = {"Computer Science", "Mathematics",       "Physics",
                                               "Business Administration", "English Literature", "Civil Engineering"};
const std::vector<std::string> kFaculties = {"Engineering", "Sciences", "Sciences", "Business", "Humanities", "Engineering"};
const std::vector<std::string> kPrefixes = {"CSC", "MTH", "PHY", "BUS", "ENG", "CIV"};
const std::vector<std::vector<std::string>> kMajors = {
    {"Computer Science", "Software Engineering"}, {"Pure Mathematics", "Applied Statistics"},
    {"Physics", "Astrophysics"},                  {"Accounting", "Marketing"},
    {"English Literature", "Linguistics"},        {"Civil Engineering", "Environmental Engineering"}};
const std::vector<std::vector<std::string>> kCourses = {
    {"Introduction To Programming", "Data Structures", "Algorithms", "Operating Systems", "Databases", "Computer Networks"},
    {"Calculus", "Linear Algebra", "Probability", "Real Analysis", "Number Theory", "Differential Equations"},
    {"Mechanics", "Electromagnetism", "Thermodynamics", "Quantum Physics", "Optics", "Relativity"},
    {"Financial Accounting", "Microeconomics", "Management", "Business Law", "Marketing Principles", "Finance"},
    {"Poetry", "The Novel", "Shakespeare", "Academic Writing", "Drama", "Literary Theory"},
    {"Statics", "Surveying", "Structural Analysis", "Hydraulics", "Soil Mechanics", "Construction Materials"}};
const std::vector<std::string> kFirstNames = {
    "Adam", "Maya", "Karim", "Lara", "Omar", "Nadia", "Rami", "Sara", "Hadi", "Lina", "Fadi", "Rana",
    "Ziad", "Dana", "Tarek", "Hiba", "Samir", "Nour", "Walid", "Yara", "Jad", "Rita", "Bilal", "Mira",
    "Georges", "Layla", "Elias", "Zeina", "Michel", "Joanna"};
const std::vector<std::string> kLastNames = {
    "Haddad", "Khoury", "Saleh", "Nasser", "Hamdan", "Aoun", "Sabbagh", "Mansour", "Karam", "Azar",
    "Fares", "Hobeika", "Daher", "Najjar", "Ghanem", "Rizk", "Tannous", "Bitar", "Salameh", "Issa",
    "Chidiac", "Abboud", "Jaber", "Kassab", "Maalouf", "Sfeir", "Yammine", "Zein", "Touma", "Moussa"};
const std::vector<std::string> kStreets = {"Hamra Street", "Bliss Street", "Main Road", "Clemenceau Street",
                                           "Sassine Square", "Verdun Street"};
const std::vector<std::string> kCities = {"Beirut", "Byblos", "Tripoli", "Saida", "Zahle"};
const std::vector<std::string> kRanks = {"Professor", "Associate Professor", "Assistant Professor", "Lecturer"};
const std::vector<std::string> kAccountStatus = {"active", "active", "active", "suspended", "closed"};
const std::vector<std::string> kActivities = {"Chess Club",       "Football Team",  "Drama Society", "Debate Club",
                                              "Robotics Club",    "Choir",          "Basketball Team",
                                              "Photography Club", "Volunteer Corps", "Hiking Club"};
const std::vector<std::string> kActivityTypes = {"academic", "sport", "culture", "academic", "academic",
                                                 "culture",  "sport", "culture", "community", "sport"};
const std::vector<std::string> kItems = {"Projector", "Laptop", "Whiteboard", "Microscope", "Desk",
                                         "Chair",     "Printer", "Oscilloscope", "Server Rack", "Camera"};
const std::vector<std::string> kItemCategories = {"electronics", "electronics", "furniture", "lab", "furniture",
                                                  "furniture",   "electronics", "lab",       "electronics", "electronics"};
const std::vector<std::string> kDegrees = {"BSc", "BA", "BEng", "MSc", "MBA"};
const std::vector<std::string> kEmployers = {"Blom Bank", "Murex", "Anghami", "Touch", "Alfa Telecom",
                                             "Dar Al Handasah", "Khatib And Alami", "Bank Audi"};
const std::vector<std::string> kRooms = {"A", "B", "C", "D"};
const std::vector<std::string> kTerms = {"Fall", "Spring", "Summer"};
const std::vector<std::string> kNullTokens = {"N/A", "NULL", "-", "?", "", "null", " n/a "};
const std::vector<std::string> kBadGenders = {"X", "U", "Unknown"};
const std::array<std::string_view, 12> kMonthNames = {"January", "February", "March",     "April",   "May",      "June",
                                                      "July",    "August",   "September", "October", "November", "December"};
const std::set<std::string> kTitleColumns = {"st_name", "in_name", "mj_name", "dep_name", "co_name", "act_name", "item_name"};

struct Term {
  std::string name;
  std::int64_t year;
  Date start;
};

Date ymd(int y, int m, int d) { return *Date::from_ymd(y, m, d); }

Date random_date(Rng& rng, Date lo, Date hi) {
  return Date::from_days(static_cast<std::int32_t>(rng.between(lo.days(), hi.days())));
}

Value dec(std::int64_t units) { return Value::decimal(Decimal::from_units(units)); }

std::string pad2(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

class Builder {
 public:
  explicit Builder(const GenConfig& c) : c_(c), rng_(c.seed) {}

  std::map<std::string, std::vector<Row>> build() {
    departments();
    majors();
    instructors();
    courses();
    terms();
    sections();
    students();
    accounts_and_receipts();
    activities();
    transcript();
    items_and_assets();
    alumni();
    return std::move(t_);
  }

  Rng& rng() { return rng_; }

 private:
  void add(const std::string& table, Row row) { t_[table].push_back(std::move(row)); }

  void departments() {
    for (std::size_t d = 0; d < kDepartments.size(); ++d) {
      add("department", {Value::integer(static_cast<std::int64_t>(d + 1)), Value::text(kDepartments[d]),
                         Value::text(kFaculties[d])});
    }
  }

  void majors() {
    std::int64_t id = 1;
    for (std::size_t d = 0; d < kMajors.size(); ++d) {
      for (const auto& name : kMajors[d]) {
        add("major", {Value::integer(id++), Value::text(name), Value::integer(static_cast<std::int64_t>(d + 1))});
      }
    }
  }

  void instructors() {
    std::int64_t id = 1;
    for (std::size_t d = 0; d < kDepartments.size(); ++d) {
      for (int k = 0; k < 3; ++k) {
        dept_instructors_[d].push_back(id);
        add("instructor", {Value::integer(id++), Value::text(rng_.pick(kFirstNames) + " " + rng_.pick(kLastNames)),
                           Value::integer(static_cast<std::int64_t>(d + 1)), Value::text(rng_.pick(kRanks))});
      }
    }
  }

  void courses() {
    for (std::size_t d = 0; d < kDepartments.size(); ++d) {
      const auto& pool = kCourses[d];
      for (std::size_t k = 0; k < c_.courses_per_dept; ++k) {
        std::string code = kPrefixes[d] + std::to_string(200 + k);
        std::string name = pool[k % pool.size()];
        if (k >= pool.size()) name += " " + std::to_string(k / pool.size() + 1);
        course_codes_.push_back(code);
        course_dept_.push_back(d);
        add("course", {Value::text(code), Value::text(name), Value::integer(rng_.between(2, 4)),
                       Value::integer(static_cast<std::int64_t>(d + 1))});
      }
    }
  }

  void terms() {
    for (std::size_t i = 0; i < c_.semesters; ++i) {
      const std::string& name = kTerms[i % 3];
      const int year = 2010 + static_cast<int>((i + 2) / 3);
      const int month = name == "Fall" ? 9 : name == "Spring" ? 2 : 6;
      terms_.push_back({name, year, ymd(year, month, 1)});
    }
  }

  void sections() {
    term_sections_.resize(terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      std::int64_t num = 1;
      for (std::size_t k = 0; k < course_codes_.size(); ++k) {
        const int count = k % 3 == 0 ? 2 : 1;
        for (int s = 0; s < count; ++s) {
          const auto& staff = dept_instructors_[course_dept_[k]];
          term_sections_[t].push_back(num);
          add("section", {Value::integer(num), Value::text(terms_[t].name), Value::integer(terms_[t].year),
                          Value::text(course_codes_[k]), Value::integer(staff[rng_.below(staff.size())]),
                          Value::text(rng_.pick(kRooms) + "-" + std::to_string(rng_.between(101, 420)))});
          ++num;
        }
      }
    }
  }

  void students() {
    const std::int64_t majors = static_cast<std::int64_t>(t_["major"].size());
    for (std::size_t i = 0; i < c_.students; ++i) {
      const auto id = static_cast<std::int64_t>(i + 1);
      const std::string first = rng_.pick(kFirstNames);
      const std::string last = rng_.pick(kLastNames);
      std::string lower_first = first, lower_last = last;
      for (char& ch : lower_first) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      for (char& ch : lower_last) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      Value phone = rng_.chance(0.2) ? Value::null() : Value::text("0" + std::to_string(rng_.between(1, 9)) + "-" +
                                                                    std::to_string(rng_.between(100000, 999999)));
      Value email = rng_.chance(0.1) ? Value::null()
                                     : Value::text(lower_first + "." + lower_last + std::to_string(id) + "@uni.edu");
      Value address = rng_.chance(0.15) ? Value::null()
                                        : Value::text(std::to_string(rng_.between(1, 200)) + " " + rng_.pick(kStreets) +
                                                      ", " + rng_.pick(kCities));
      add("student", {Value::integer(id), Value::text(first + " " + last),
                      Value::date(random_date(rng_, ymd(1985, 1, 1), ymd(1994, 12, 31))),
                      Value::text(rng_.chance(0.5) ? "M" : "F"), std::move(phone), std::move(email), std::move(address),
                      Value::date(random_date(rng_, ymd(2008, 9, 1), ymd(2010, 9, 1))),
                      Value::integer(rng_.between(1, majors))});
    }
  }

  void accounts_and_receipts() {
    std::int64_t receipt = 1;
    for (std::size_t i = 0; i < c_.students; ++i) {
      const auto ac = static_cast<std::int64_t>(i + 1);
      add("account", {Value::integer(ac), Value::integer(ac), dec(rng_.between(-500, 5000) * 100),
                      Value::text(rng_.pick(kAccountStatus))});
      for (const auto& term : terms_) {
        const Date due = Date::from_days(term.start.days() + 30);
        Value paid;
        const double p = rng_.unit();
        if (p < 0.05) {
          paid = Value::null();
        } else if (p < 0.35) {
          paid = Value::date(Date::from_days(due.days() + static_cast<std::int32_t>(rng_.between(1, 60))));
        } else {
          paid = Value::date(Date::from_days(due.days() - static_cast<std::int32_t>(rng_.between(0, 20))));
        }
        add("receipt", {Value::integer(receipt++), Value::integer(ac), dec(rng_.between(500, 3000) * 10000),
                        Value::date(due), std::move(paid), Value::text(term.name), Value::integer(term.year)});
      }
    }
  }

  void activities() {
    for (std::size_t a = 0; a < kActivities.size(); ++a) {
      Value supervisor = rng_.chance(0.3) ? Value::null()
                                          : Value::text(rng_.pick(kFirstNames) + " " + rng_.pick(kLastNames));
      add("activities", {Value::integer(static_cast<std::int64_t>(a + 1)), Value::text(kActivities[a]),
                         Value::text(kActivityTypes[a]), std::move(supervisor)});
    }
    std::int64_t reg = 1;
    for (std::size_t i = 0; i < c_.students; ++i) {
      const auto count = rng_.below(3);
      for (std::size_t k = 0; k < count; ++k) {
        Value act = rng_.chance(0.05) ? Value::null()
                                      : Value::integer(static_cast<std::int64_t>(rng_.below(kActivities.size()) + 1));
        add("registrationActivities", {Value::integer(reg++), Value::integer(static_cast<std::int64_t>(i + 1)),
                                       std::move(act), Value::date(random_date(rng_, ymd(2010, 9, 1), ymd(2012, 6, 30)))});
      }
    }
  }

  void transcript() {
    for (std::size_t i = 0; i < c_.students; ++i) {
      for (std::size_t t = 0; t < terms_.size(); ++t) {
        std::vector<std::int64_t> pool = term_sections_[t];
        const std::size_t take = std::min<std::size_t>(4, pool.size());
        for (std::size_t k = 0; k < take; ++k) {
          std::swap(pool[k], pool[k + rng_.below(pool.size() - k)]);
          Value grade;
          if (!rng_.chance(0.02)) {
            double g = std::clamp(rng_.normal(72.0, 12.0), 0.0, 100.0);
            grade = dec(static_cast<std::int64_t>(std::llround(g * 10.0)) * 1000);
          }
          add("transcript", {Value::integer(static_cast<std::int64_t>(i + 1)), Value::integer(pool[k]),
                             Value::text(terms_[t].name), Value::integer(terms_[t].year), std::move(grade)});
        }
      }
    }
  }

  void items_and_assets() {
    for (std::size_t k = 0; k < kItems.size(); ++k) {
      add("item", {Value::integer(static_cast<std::int64_t>(k + 1)), Value::text(kItems[k]), Value::text(kItemCategories[k])});
    }
    for (std::int64_t a = 1; a <= 30; ++a) {
      add("assets", {Value::integer(a), Value::integer(static_cast<std::int64_t>(rng_.below(kDepartments.size()) + 1)),
                     Value::integer(static_cast<std::int64_t>(rng_.below(kItems.size()) + 1)),
                     Value::integer(rng_.between(1, 40))});
    }
  }

  void alumni() {
    std::int64_t id = 1;
    for (std::size_t i = 0; i < c_.students; ++i) {
      if (!rng_.chance(0.2)) continue;
      Value employer = rng_.chance(0.3) ? Value::null() : Value::text(rng_.pick(kEmployers));
      add("alumni", {Value::integer(id++), Value::integer(static_cast<std::int64_t>(i + 1)),
                     Value::date(random_date(rng_, ymd(2012, 6, 1), ymd(2014, 7, 31))), Value::text(rng_.pick(kDegrees)),
                     std::move(employer)});
    }
  }

  const GenConfig& c_;
  Rng rng_;
  std::map<std::string, std::vector<Row>> t_;
  std::map<std::size_t, std::vector<std::int64_t>> dept_instructors_;
  std::vector<std::string> course_codes_;
  std::vector<std::size_t> course_dept_;
  std::vector<Term> terms_;
  std::vector<std::vector<std::int64_t>> term_sections_;
};

bool is_fk_column(const TableSchema& s, const std::string& column) {
  for (const auto& fk : s.foreign_keys) {
    if (std::find(fk.columns.begin(), fk.columns.end(), column) != fk.columns.end()) return true;
  }
  return false;
}

std::string scramble_case(Rng& rng, const std::string& s) {
  std::string out = s;
  for (char& ch : out) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      ch = rng.chance(0.5) ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
                           : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  if (out == s) {
    for (char& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  if (out == s) {
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

std::string pad_whitespace(Rng& rng, const std::string& s) {
  const std::size_t space = s.find(' ');
  switch (rng.below(space == std::string::npos ? 3 : 4)) {
    case 0: return "  " + s;
    case 1: return s + "   ";
    case 2: return " " + s + "\t";
    default: return s.substr(0, space) + "   " + s.substr(space + 1);
  }
}

std::string reformat_date(Rng& rng, const std::string& iso) {
  const Date d = *Date::parse_iso(iso);
  const std::string y = std::to_string(d.year());
  const int choice = static_cast<int>(rng.below(d.day() > 12 ? 4 : 3));
  switch (choice) {
    case 0: return pad2(d.day()) + "/" + pad2(d.month()) + "/" + y;
    case 1: return pad2(d.day()) + "." + pad2(d.month()) + "." + y;
    case 2: {
      std::string month(kMonthNames[static_cast<std::size_t>(d.month() - 1)]);
      if (rng.chance(0.5)) month = month.substr(0, 3);
      return month + " " + std::to_string(d.day()) + ", " + y;
    }
    default: return pad2(d.month()) + "/" + pad2(d.day()) + "/" + y;
  }
}

std::string out_of_range_grade(Rng& rng) {
  const std::int64_t tenths = rng.chance(0.5) ? rng.between(1005, 1600) : -rng.between(10, 300);
  return Decimal::from_units(tenths * 1000).to_string();
}

}  // namespace

void GenConfig::validate() const {
  if (!(dirty_rate >= 0.0 && dirty_rate <= 1.0)) throw ValidationError("dirty_rate must be within [0, 1]");
  if (students == 0) throw ValidationError("students must be positive");
  if (courses_per_dept == 0) throw ValidationError("courses_per_dept must be positive");
  if (semesters == 0) throw ValidationError("semesters must be positive");
}

std::string DirtLedger::to_csv() const {
  std::string out;
  csv::append_record(out, {"table", "row_key", "column", "original", "corrupted", "kind"});
  for (const auto& e : entries) {
    csv::append_record(out, {e.table, e.row_key, e.column, e.original, e.corrupted, e.kind});
  }
  return out;
}

DirtLedger DirtLedger::from_csv(std::string_view text) {
  csv::Document doc = csv::parse(text);
  DirtLedger ledger;
  for (std::size_t r = 1; r < doc.records.size(); ++r) {
    const auto& rec = doc.records[r];
    if (rec.size() != 6) throw ParseError("line " + std::to_string(doc.lines[r]) + ": ledger row needs 6 fields", doc.lines[r], 1);
    auto opt = [](const csv::Field& f) { return f.is_null() ? std::nullopt : std::optional<std::string>(f.text); };
    ledger.entries.push_back({rec[0].text, rec[1].text, rec[2].text, opt(rec[3]), opt(rec[4]), rec[5].text});
  }
  return ledger;
}

std::string Dataset::table_csv(const std::string& table) const {
  const TableSchema& s = *schema.find(table);
  std::string out;
  CellRow header;
  for (const auto& c : s.columns) header.emplace_back(c.name);
  csv::append_record(out, header);
  auto it = tables.find(table);
  if (it != tables.end()) {
    for (const auto& row : it->second) csv::append_record(out, row);
  }
  return out;
}

void Dataset::write(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::string counts;
  csv::append_record(counts, {"table", "rows"});
  for (const auto& [name, table] : schema.tables) {
    write_file(dir / (name + ".csv"), table_csv(name));
    auto it = tables.find(name);
    csv::append_record(counts, {name, std::to_string(it == tables.end() ? 0 : it->second.size())});
  }
  write_file(dir / "dirt_ledger.csv", ledger.to_csv());
  write_file(dir / "row_counts.csv", counts);
}

Dataset generate(const GenConfig& config) {
  config.validate();
  Dataset out;
  out.schema = parse_schema_manifest(canonical_manifest());
  Builder builder(config);
  std::map<std::string, std::vector<Row>> clean = builder.build();
  Rng& rng = builder.rng();

  struct Slot {
    std::string table;
    std::size_t row;
    std::size_t column;
  };
  // Repairable slots admit a kind the canonical rules undo; fatal-only slots
  // (non-nullable numbers, non-Null grades) can only be quarantined.
  std::vector<Slot> repairable_slots;
  std::vector<Slot> fatal_slots;
  std::vector<Slot> fk_slots;
  std::size_t total_cells = 0;
  for (const auto& [name, rows] : clean) {
    const TableSchema& s = *out.schema.find(name);
    total_cells += rows.size() * s.columns.size();
    for (std::size_t c = 0; c < s.columns.size(); ++c) {
      const ColumnDef& col = s.columns[c];
      if (s.is_key_column(col.name)) continue;
      const bool fk = is_fk_column(s, col.name);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Value& v = rows[r][c];
        if (fk) {
          if (!v.is_null()) fk_slots.push_back({name, r, c});
        } else if (v.is_null() || col.type == ValueType::kText || col.type == ValueType::kDate) {
          repairable_slots.push_back({name, r, c});
        } else if (!col.nullable || col.name == "tr_grade") {
          fatal_slots.push_back({name, r, c});
        }
      }
    }
  }
  out.ledger.total_cells = total_cells;

  const auto wanted = static_cast<std::size_t>(std::llround(config.dirty_rate * static_cast<double>(total_cells)));
  const std::size_t row_level = wanted / 10;
  const std::size_t cell_level = wanted - row_level;
  const std::size_t fatal = std::min(fatal_slots.size(), cell_level / 20);
  const std::size_t repairable = std::min(repairable_slots.size(), cell_level - fatal);
  const std::size_t orphans = std::min(row_level / 2, fk_slots.size());
  std::size_t duplicates = row_level - orphans;

  auto sample = [&](std::vector<Slot>& slots, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);
    std::vector<Slot> chosen(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(chosen.begin(), chosen.end(), [](const Slot& a, const Slot& b) {
      return std::tie(a.table, a.row, a.column) < std::tie(b.table, b.row, b.column);
    });
    return chosen;
  };

  for (const auto& [name, table] : out.schema.tables) out.tables[name];
  for (const auto& [name, rows] : clean) {
    auto& cells = out.tables[name];
    for (const auto& row : rows) {
      CellRow r;
      for (const auto& v : row) r.push_back(v.to_text());
      cells.push_back(std::move(r));
    }
  }
  std::map<std::string, std::set<std::size_t>> dirty_rows;
  auto row_key = [&](const std::string& table, std::size_t row) {
    const TableSchema& s = *out.schema.find(table);
    return format_key(project(clean.at(table)[row], s.key_indices()));
  };

  std::vector<Slot> cell_dirt = sample(fatal_slots, fatal);
  for (const Slot& slot : sample(repairable_slots, repairable)) cell_dirt.push_back(slot);
  for (const Slot& slot : cell_dirt) {
    const TableSchema& s = *out.schema.find(slot.table);
    const ColumnDef& col = s.columns[slot.column];
    const Value& v = clean.at(slot.table)[slot.row][slot.column];
    std::vector<std::string_view> kinds;
    std::vector<std::string_view> fatal_kinds;
    if (v.is_null()) {
      kinds.push_back(dirt::kNullToken);
    } else {
      if (col.type == ValueType::kText) kinds.push_back(dirt::kWhitespace);
      if (col.type == ValueType::kText && kTitleColumns.count(col.name)) kinds.push_back(dirt::kCase);
      if (col.type == ValueType::kDate) kinds.push_back(dirt::kDateFormat);
      if (!col.nullable) fatal_kinds.push_back(dirt::kNullToken);
      if (col.name == "st_gender") fatal_kinds.push_back(dirt::kOutOfDomain);
      if (col.name == "tr_grade") fatal_kinds.push_back(dirt::kOutOfRange);
    }
    // A repairable slot takes a fatal kind one time in twenty.
    const bool use_fatal = kinds.empty() || (!fatal_kinds.empty() && rng.chance(0.05));
    const auto& pool = use_fatal ? fatal_kinds : kinds;
    const std::string_view kind = pool[rng.below(pool.size())];
    const std::optional<std::string> original = v.to_text();
    std::string corrupted;
    if (kind == dirt::kNullToken) {
      corrupted = rng.pick(kNullTokens);
    } else if (kind == dirt::kWhitespace) {
      corrupted = pad_whitespace(rng, *original);
    } else if (kind == dirt::kCase) {
      corrupted = scramble_case(rng, *original);
    } else if (kind == dirt::kDateFormat) {
      corrupted = reformat_date(rng, *original);
    } else if (kind == dirt::kOutOfDomain) {
      corrupted = rng.pick(kBadGenders);
    } else {
      corrupted = out_of_range_grade(rng);
    }
    out.tables[slot.table][slot.row][slot.column] = corrupted;
    dirty_rows[slot.table].insert(slot.row);
    out.ledger.entries.push_back(
        {slot.table, row_key(slot.table, slot.row), col.name, original, corrupted, std::string(kind)});
  }

  std::int64_t next_orphan = 9000000;
  for (const Slot& slot : sample(fk_slots, orphans)) {
    const TableSchema& s = *out.schema.find(slot.table);
    const ColumnDef& col = s.columns[slot.column];
    const std::optional<std::string> original = clean.at(slot.table)[slot.row][slot.column].to_text();
    std::string corrupted = col.type == ValueType::kText ? "ZZZ" + std::to_string(next_orphan) : std::to_string(next_orphan);
    ++next_orphan;
    out.tables[slot.table][slot.row][slot.column] = corrupted;
    dirty_rows[slot.table].insert(slot.row);
    out.ledger.entries.push_back(
        {slot.table, row_key(slot.table, slot.row), col.name, original, corrupted, std::string(dirt::kOrphanFk)});
  }

  std::vector<Slot> clean_rows;
  for (const auto& [name, rows] : clean) {
    const auto& dirty = dirty_rows[name];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!dirty.count(r)) clean_rows.push_back({name, r, 0});
    }
  }
  duplicates = std::min(duplicates, clean_rows.size());
  for (const Slot& slot : sample(clean_rows, duplicates)) {
    out.tables[slot.table].push_back(out.tables[slot.table][slot.row]);
    out.ledger.entries.push_back(
        {slot.table, row_key(slot.table, slot.row), "*", std::nullopt, std::nullopt, std::string(dirt::kDuplicateRow)});
  }
  return out;
}

}  // namespace uwh
