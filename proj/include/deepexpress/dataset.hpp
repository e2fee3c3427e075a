#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace dx {

// Malformed or inconsistent input data.
struct DataError : Error {
    using Error::Error;
};

// ---- calendar ------------------------------------------------------------

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    bool operator==(const Date&) const = default;
};

// Days since 1970-01-01 (Hinnant's civil-days algorithm).
inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline Date civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline long day_number(const Date& d) { return days_from_civil(d.year, d.month, d.day); }

// Monday = 0 … Sunday = 6. 1970-01-01 was a Thursday.
inline int day_of_week(const Date& d) {
    long z = day_number(d);
    return static_cast<int>(((z % 7) + 7 + 3) % 7);
}

inline bool is_weekend(int dow) { return dow == 5 || dow == 6; }

inline Date add_days(const Date& d, long n) { return civil_from_days(day_number(d) + n); }

inline bool valid_date(const Date& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = lengths[d.month - 1];
    bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) max_day = 29;
    return d.day <= max_day;
}

inline Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw DataError("bad date '" + text + "', expected YYYY-MM-DD");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (text[i] < '0' || text[i] > '9')
            throw DataError("bad date '" + text + "', expected YYYY-MM-DD");
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (!valid_date(d)) throw DataError("no such date: '" + text + "'");
    return d;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

// ---- vocabularies ----------------------------------------------------------

struct Vocabulary {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    const std::string& name_of(std::size_t id) const {
        if (id >= names.size())
            throw DataError("vocabulary id " + std::to_string(id) + " out of range");
        return names[id];
    }
};

struct DataVocab {
    Vocabulary weather;
    Vocabulary holiday;

    static DataVocab standard() {
        DataVocab v;
        v.weather.names = {"sunny",         "cloudy",        "overcast",   "light_rain",
                           "moderate_rain", "heavy_rain",    "shower",     "thunderstorm",
                           "light_snow",    "moderate_snow", "heavy_snow", "sleet",
                           "fog",           "haze",          "dust"};
        v.holiday.names = {"ordinary", "ecommerce", "festival", "statutory", "special"};
        return v;
    }
};

// ---- dataset ---------------------------------------------------------------

struct DailyRecord {
    Date date;
    double y = 0.0;
    double temperature = 0.0;
    int weather = 0;
    int holiday = 0;
    int week = 0;
};

/**
 * A contiguous daily series. Construction validates the calendar (strictly
 * increasing, no gaps), value sanity, and that the week column agrees with
 * the date. Immutable after construction.
 */
class SeriesDataset {
public:
    SeriesDataset() = default;

    explicit SeriesDataset(std::vector<DailyRecord> rows, DataVocab vocab = DataVocab::standard())
        : rows_(std::move(rows)), vocab_(std::move(vocab)) {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const DailyRecord& r = rows_[i];
            std::string where = "day " + std::to_string(i + 1) + " (" + format_date(r.date) + ")";
            if (i > 0) {
                long gap = day_number(r.date) - day_number(rows_[i - 1].date);
                if (gap == 0)
                    throw DataError("duplicated date " + format_date(r.date));
                if (gap != 1)
                    throw DataError("gap in dates: " + format_date(rows_[i - 1].date) +
                                    " is followed by " + format_date(r.date));
            }
            if (!std::isfinite(r.y) || r.y < 0.0)
                throw DataError(where + ": y must be a nonnegative count");
            if (!std::isfinite(r.temperature))
                throw DataError(where + ": temperature is not finite");
            if (r.weather < 0 || static_cast<std::size_t>(r.weather) >= vocab_.weather.size())
                throw DataError(where + ": weather id " + std::to_string(r.weather) +
                                " out of range");
            if (r.holiday < 0 || static_cast<std::size_t>(r.holiday) >= vocab_.holiday.size())
                throw DataError(where + ": holiday id " + std::to_string(r.holiday) +
                                " out of range");
            if (r.week != day_of_week(r.date))
                throw DataError(where + ": week " + std::to_string(r.week) +
                                " does not match the date (expected " +
                                std::to_string(day_of_week(r.date)) + ")");
        }
    }

    std::size_t size() const { return rows_.size(); }
    const DailyRecord& operator[](std::size_t i) const { return rows_[i]; }
    const std::vector<DailyRecord>& rows() const { return rows_; }
    const DataVocab& vocab() const { return vocab_; }

private:
    std::vector<DailyRecord> rows_;
    DataVocab vocab_;
};

// ---- csv -------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, const std::string& what, std::size_t row) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row) + ": " + what + " is not a number: '" + s +
                        "'");
    }
}

}  // namespace detail

inline const char* kCsvHeader = "date,y,temperature,weather,holiday,week";

inline SeriesDataset load_csv(const std::string& path,
                              const DataVocab& vocab = DataVocab::standard()) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    {
        auto fields = detail::split_csv_line(line);
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i)
            joined += (i ? "," : "") + fields[i];
        if (joined != kCsvHeader)
            throw DataError("'" + path + "': expected header '" + std::string(kCsvHeader) +
                            "', got '" + joined + "'");
    }
    std::vector<DailyRecord> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 6)
            throw DataError("row " + std::to_string(lineno) + ": expected 6 fields, got " +
                            std::to_string(fields.size()));
        DailyRecord r;
        try {
            r.date = parse_date(fields[0]);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(lineno) + ": " + e.what());
        }
        r.y = detail::parse_number(fields[1], "y", lineno);
        r.temperature = detail::parse_number(fields[2], "temperature", lineno);
        r.weather = vocab.weather.index_of(fields[3]);
        if (r.weather < 0)
            throw DataError("row " + std::to_string(lineno) + ": unknown weather '" + fields[3] +
                            "'");
        r.holiday = vocab.holiday.index_of(fields[4]);
        if (r.holiday < 0)
            throw DataError("row " + std::to_string(lineno) + ": unknown holiday '" + fields[4] +
                            "'");
        double wk = detail::parse_number(fields[5], "week", lineno);
        if (wk != std::floor(wk) || wk < 0.0 || wk > 6.0)
            throw DataError("row " + std::to_string(lineno) + ": week must be an integer 0-6");
        r.week = static_cast<int>(wk);
        rows.push_back(r);
    }
    try {
        return SeriesDataset(std::move(rows), vocab);
    } catch (const DataError& e) {
        throw DataError("'" + path + "': " + e.what());
    }
}

inline void write_csv(const SeriesDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << kCsvHeader << "\n";
    char buf[64];
    for (const DailyRecord& r : data.rows()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.temperature);
        out << format_date(r.date) << ',' << static_cast<long long>(std::llround(r.y)) << ','
            << buf << ',' << data.vocab().weather.name_of(static_cast<std::size_t>(r.weather))
            << ',' << data.vocab().holiday.name_of(static_cast<std::size_t>(r.holiday)) << ','
            << r.week << "\n";
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

// ---- scaling ---------------------------------------------------------------

/** Min-max scaler: min -> 0, max -> 1, linear outside the fitted range. */
struct ScalerState {
    double min = 0.0;
    double max = 0.0;
    bool fitted = false;
    bool constant = false;

    static ScalerState fit(std::span<const double> xs) {
        if (xs.empty()) throw DataError("scaler fit: no values");
        ScalerState s;
        s.min = s.max = xs[0];
        for (double x : xs) {
            if (!std::isfinite(x)) throw DataError("scaler fit: non-finite value");
            s.min = std::min(s.min, x);
            s.max = std::max(s.max, x);
        }
        s.fitted = true;
        s.constant = s.min == s.max;
        return s;
    }

    double apply(double x) const {
        if (!fitted) throw DataError("scaler apply before fit");
        if (constant) return 0.0;
        return (x - min) / (max - min);
    }

    double invert(double u) const {
        if (!fitted) throw DataError("scaler invert before fit");
        if (constant) return min;
        return min + u * (max - min);
    }
};

struct Scalers {
    ScalerState y;
    ScalerState temperature;
};

// ---- windows ---------------------------------------------------------------

/**
 * One supervised example: h days of (scaled) history, the feature window of
 * the 2l+1 days around the target day, and the scaled target itself. The
 * feature window rows are raw values ordered temperature, weather, holiday,
 * week.
 */
struct Sample {
    std::vector<double> history;
    std::vector<std::vector<double>> feature_window;
    double target = 0.0;
    double target_raw = 0.0;
    std::size_t anchor = 0;  // 0-based index of the last history day
    Date target_date;
};

inline std::vector<std::vector<double>> feature_window_rows(const SeriesDataset& data,
                                                            std::size_t first,
                                                            std::size_t last) {
    std::vector<std::vector<double>> window;
    window.reserve(last - first + 1);
    for (std::size_t d = first; d <= last; ++d) {
        const DailyRecord& r = data[d];
        window.push_back({r.temperature, static_cast<double>(r.weather),
                          static_cast<double>(r.holiday), static_cast<double>(r.week)});
    }
    return window;
}

/**
 * Sliding windows over the series: for each anchor day t (the last history
 * day), history covers t-h+1..t, the target is day t+1, and the feature
 * window covers days t+1-l..t+1+l. With a scaler, history and target are
 * scaled; feature windows stay raw. Yields T-h-l samples when l <= h.
 */
inline std::vector<Sample> make_windows(const SeriesDataset& data, std::size_t h, std::size_t l,
                                        const ScalerState* y_scaler = nullptr) {
    if (h == 0) throw DataError("make_windows: history length must be positive");
    std::size_t T = data.size();
    std::size_t needed = (l > h ? l : h) + l + 1;
    if (T < needed)
        throw DataError("series too short: " + std::to_string(T) + " days, need at least " +
                        std::to_string(needed) + " for h=" + std::to_string(h) +
                        ", l=" + std::to_string(l));
    std::size_t first_anchor = (l > h ? l : h) - 1;
    std::size_t last_anchor = T - l - 2;
    std::vector<Sample> samples;
    samples.reserve(last_anchor - first_anchor + 1);
    for (std::size_t a = first_anchor; a <= last_anchor; ++a) {
        Sample s;
        s.anchor = a;
        s.history.reserve(h);
        for (std::size_t d = a + 1 - h; d <= a; ++d)
            s.history.push_back(y_scaler ? y_scaler->apply(data[d].y) : data[d].y);
        s.target_raw = data[a + 1].y;
        s.target = y_scaler ? y_scaler->apply(s.target_raw) : s.target_raw;
        s.target_date = data[a + 1].date;
        s.feature_window = feature_window_rows(data, a + 1 - l, a + 1 + l);
        samples.push_back(std::move(s));
    }
    return samples;
}

// ---- chronological split -----------------------------------------------------

struct SplitCounts {
    std::size_t train = 0, test = 0, val = 0;
};

inline SplitCounts split_counts(std::size_t n) {
    if (n < 5)
        throw DataError("need at least 5 samples to split, got " + std::to_string(n));
    SplitCounts c;
    c.train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
    c.test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    c.val = n - c.train - c.test;
    return c;
}

struct SplitSamples {
    std::vector<Sample> train, test, val;
};

// Contiguous 60/20/20: training first, then test, validation last.
inline SplitSamples split_dataset(const std::vector<Sample>& samples) {
    SplitCounts c = split_counts(samples.size());
    SplitSamples out;
    out.train.assign(samples.begin(), samples.begin() + static_cast<long>(c.train));
    out.test.assign(samples.begin() + static_cast<long>(c.train),
                    samples.begin() + static_cast<long>(c.train + c.test));
    out.val.assign(samples.begin() + static_cast<long>(c.train + c.test), samples.end());
    return out;
}

// ---- end-to-end preparation ---------------------------------------------------

struct Experiment {
    Scalers scalers;
    SplitSamples split;
};

/**
 * Windows + split + scaling in the right order: the scalers see only the
 * days a training sample can touch (everything up to and including the last
 * training target), then the windows are cut with them. Later days scale by
 * linear extrapolation.
 */
inline Experiment prepare_experiment(const SeriesDataset& data, std::size_t h, std::size_t l) {
    std::vector<Sample> raw = make_windows(data, h, l, nullptr);
    SplitCounts counts = split_counts(raw.size());
    std::size_t last_train_day = raw[counts.train - 1].anchor + 1;

    std::vector<double> ys, temps;
    ys.reserve(last_train_day + 1);
    temps.reserve(last_train_day + 1);
    for (std::size_t d = 0; d <= last_train_day; ++d) {
        ys.push_back(data[d].y);
        temps.push_back(data[d].temperature);
    }
    Experiment ex;
    ex.scalers.y = ScalerState::fit(ys);
    ex.scalers.temperature = ScalerState::fit(temps);
    ex.split = split_dataset(make_windows(data, h, l, &ex.scalers.y));
    return ex;
}

}  // namespace dx
