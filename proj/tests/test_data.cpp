#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include <deepexpress/dataset.hpp>
#include <deepexpress/synthetic.hpp>

#include "test_support.hpp"

using dx::DataError;
using dx::Date;
using dx::GeneratorSpec;
using dx::Sample;
using dx::ScalerState;
using dx::SeriesDataset;

namespace {

std::string write_file(const std::string& name, const std::string& content) {
    std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

// Dataset of T days with y = 100 + index, all-ordinary features.
SeriesDataset ramp_dataset(std::size_t T, Date start = {2020, 3, 2}) {
    std::vector<dx::DailyRecord> rows(T);
    for (std::size_t i = 0; i < T; ++i) {
        rows[i].date = dx::add_days(start, static_cast<long>(i));
        rows[i].y = 100.0 + static_cast<double>(i);
        rows[i].temperature = 10.0 + 0.01 * static_cast<double>(i);
        rows[i].weather = static_cast<int>(i % 15);
        rows[i].holiday = static_cast<int>(i % 5);
        rows[i].week = dx::day_of_week(rows[i].date);
    }
    return SeriesDataset(std::move(rows));
}

// Independent anchor enumeration: a day t (0-based) anchors a sample when
// all history, target, and window days exist in the series.
std::size_t enumerate_anchors(std::size_t T, std::size_t h, std::size_t l) {
    std::size_t count = 0;
    for (std::size_t a = 0; a + 1 < T; ++a) {
        if (a + 1 < h) continue;       // history would start before day 0
        if (a + 1 < l) continue;       // window would start before day 0
        if (a + 1 + l > T - 1) continue;  // window would run past the end
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("calendar arithmetic") {
    REQUIRE(dx::day_of_week(Date{2016, 1, 4}) == 0);  // a Monday
    REQUIRE(dx::day_of_week(Date{2016, 1, 10}) == 6);
    REQUIRE(dx::is_weekend(5));
    REQUIRE(dx::is_weekend(6));
    REQUIRE(!dx::is_weekend(4));

    REQUIRE(dx::format_date(dx::parse_date("2016-02-29")) == "2016-02-29");
    REQUIRE_THROWS_AS(dx::parse_date("2017-02-29"), DataError);
    REQUIRE_THROWS_AS(dx::parse_date("2017-13-01"), DataError);
    REQUIRE_THROWS_AS(dx::parse_date("2017/01/01"), DataError);

    Date d{2019, 12, 31};
    REQUIRE(dx::add_days(d, 1) == Date{2020, 1, 1});
    REQUIRE(dx::add_days(d, -30) == Date{2019, 12, 1});
    REQUIRE(dx::day_number(Date{1970, 1, 1}) == 0);
}

TEST_CASE("well-formed csv loads") {
    std::string path = write_file(
        "dx_ok.csv",
        "date,y,temperature,weather,holiday,week\n"
        "2021-06-07,1500,21.5,sunny,ordinary,0\n"
        "2021-06-08,1622,22.0,cloudy,ecommerce,1\n"
        "2021-06-09,1543,19.25,light_rain,ordinary,2\n");
    SeriesDataset data = dx::load_csv(path);
    REQUIRE(data.size() == 3);
    REQUIRE(data[1].y == 1622.0);
    REQUIRE(data[1].weather == 1);
    REQUIRE(data[1].holiday == 1);
    REQUIRE(data[2].week == 2);
}

TEST_CASE("csv errors name the row and offending value") {
    auto expect_error = [](const std::string& name, const std::string& body,
                           const std::string& needle) {
        std::string path = write_file(name, body);
        try {
            dx::load_csv(path);
            FAIL("expected DataError for " + name);
        } catch (const DataError& e) {
            INFO(e.what());
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    std::string header = "date,y,temperature,weather,holiday,week\n";

    expect_error("dx_dup.csv",
                 header + "2021-06-07,10,20,sunny,ordinary,0\n2021-06-07,11,20,sunny,ordinary,0\n",
                 "2021-06-07");
    expect_error("dx_gap.csv",
                 header + "2021-06-07,10,20,sunny,ordinary,0\n2021-06-09,11,20,sunny,ordinary,2\n",
                 "gap");
    expect_error("dx_weather.csv", header + "2021-06-07,10,20,drizzle,ordinary,0\n", "drizzle");
    expect_error("dx_weather_row.csv",
                 header + "2021-06-07,10,20,sunny,ordinary,0\n2021-06-08,10,20,wrong,ordinary,1\n",
                 "row 3");
    expect_error("dx_y.csv", header + "2021-06-07,abc,20,sunny,ordinary,0\n", "y");
    expect_error("dx_negy.csv", header + "2021-06-07,-5,20,sunny,ordinary,0\n", "nonnegative");
    expect_error("dx_week.csv", header + "2021-06-07,10,20,sunny,ordinary,7\n", "week");
    expect_error("dx_weekmatch.csv", header + "2021-06-07,10,20,sunny,ordinary,3\n",
                 "does not match");
    expect_error("dx_fields.csv", header + "2021-06-07,10,20,sunny,ordinary\n", "fields");
    expect_error("dx_header.csv", "date,y,temp,weather,holiday,week\n", "header");
    expect_error("dx_holiday.csv", header + "2021-06-07,10,20,sunny,xmas,0\n", "xmas");
}

TEST_CASE("csv round-trips through write and load") {
    GeneratorSpec spec;
    spec.length = 60;
    spec.seed = 5;
    auto gen = dx::generate_synthetic(spec);
    std::string path = "/tmp/dx_roundtrip.csv";
    dx::write_csv(gen.data, path);
    SeriesDataset back = dx::load_csv(path);
    REQUIRE(back.size() == gen.data.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        REQUIRE(back[i].date == gen.data[i].date);
        REQUIRE(back[i].y == gen.data[i].y);
        REQUIRE(back[i].temperature == gen.data[i].temperature);  // %.17g is lossless
        REQUIRE(back[i].weather == gen.data[i].weather);
        REQUIRE(back[i].holiday == gen.data[i].holiday);
        REQUIRE(back[i].week == gen.data[i].week);
    }
}

TEST_CASE("min-max scaler maps the fitted range to [0,1]") {
    std::vector<double> xs{10.0, 20.0, 30.0};
    ScalerState s = ScalerState::fit(xs);
    REQUIRE(s.apply(20.0) == 0.5);
    REQUIRE(s.apply(10.0) == 0.0);
    REQUIRE(s.apply(30.0) == 1.0);
    // linear extrapolation, no clipping
    REQUIRE(s.apply(40.0) == 1.5);
    REQUIRE(s.apply(0.0) == -0.5);
    for (double x : {10.0, 17.0, 30.0})
        REQUIRE(std::fabs(s.invert(s.apply(x)) - x) <= 1e-12);
}

TEST_CASE("scaler handles constant columns and unfitted state") {
    std::vector<double> xs{5.0, 5.0, 5.0};
    ScalerState s = ScalerState::fit(xs);
    REQUIRE(s.constant);
    REQUIRE(s.apply(5.0) == 0.0);
    REQUIRE(s.apply(123.0) == 0.0);
    REQUIRE(s.invert(0.7) == 5.0);

    ScalerState unfitted;
    REQUIRE_THROWS_AS(unfitted.apply(1.0), DataError);
    REQUIRE_THROWS_AS(unfitted.invert(1.0), DataError);
    REQUIRE_THROWS_AS(ScalerState::fit(std::vector<double>{}), DataError);
}

TEST_CASE("scaler is monotone on non-constant columns") {
    dx::Rng rng(12);
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(rng.uniform(-100.0, 100.0));
    ScalerState s = ScalerState::fit(xs);
    for (int i = 0; i < 200; ++i) {
        double a = rng.uniform(-150.0, 150.0);
        double b = a + rng.uniform(0.001, 10.0);
        REQUIRE(s.apply(a) < s.apply(b));
    }
}

TEST_CASE("window counts match the anchor enumeration oracle") {
    // The documented shape: T=30, h=21, l=3 -> 6 samples.
    REQUIRE(dx::make_windows(ramp_dataset(30), 21, 3).size() == 6);
    REQUIRE(enumerate_anchors(30, 21, 3) == 6);

    // Boundary: exactly one sample.
    REQUIRE(dx::make_windows(ramp_dataset(25), 21, 3).size() == 1);

    dx::Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t h = 1 + rng.index(12);
        std::size_t l = rng.index(h + 1);  // l <= h, the regime the count formula covers
        std::size_t T = h + l + 1 + rng.index(30);
        auto samples = dx::make_windows(ramp_dataset(T), h, l);
        REQUIRE(samples.size() == enumerate_anchors(T, h, l));
        REQUIRE(samples.size() == T - h - l);
    }
}

TEST_CASE("windows slice the right days") {
    SeriesDataset data = ramp_dataset(30);
    auto samples = dx::make_windows(data, 21, 3);
    const Sample& s0 = samples.front();
    REQUIRE(s0.anchor == 20);
    REQUIRE(s0.history.size() == 21);
    REQUIRE(s0.history.front() == data[0].y);
    REQUIRE(s0.history.back() == data[20].y);
    REQUIRE(s0.target_raw == data[21].y);
    REQUIRE(s0.feature_window.size() == 7);
    // window starts at day t+1-l = 18 and its temperature column matches
    for (std::size_t d = 0; d < 7; ++d)
        REQUIRE(s0.feature_window[d][0] == data[18 + d].temperature);
    REQUIRE(s0.target_date == data[21].date);

    // l = 0: the window is just the target day
    auto tight = dx::make_windows(data, 5, 0);
    REQUIRE(tight.front().feature_window.size() == 1);
    REQUIRE(tight.front().feature_window[0][0] == data[5].temperature);
}

TEST_CASE("history and window days overlap exactly on shared days") {
    SeriesDataset data = ramp_dataset(40);
    std::size_t h = 10, l = 4;
    for (const Sample& s : dx::make_windows(data, h, l)) {
        // days t+1-l .. t of the window are also history days h-l .. h-1
        for (std::size_t j = 0; j < l; ++j) {
            std::size_t day = s.anchor + 1 - l + j;
            REQUIRE(s.feature_window[j][0] == data[day].temperature);
            REQUIRE(s.history[h - l + j] == data[day].y);
        }
    }
}

TEST_CASE("too-short series name the required minimum") {
    try {
        dx::make_windows(ramp_dataset(20), 21, 3);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find("25") != std::string::npos);
    }
}

TEST_CASE("split follows the 60/20/20 rounding rule") {
    auto counts10 = dx::split_counts(10);
    REQUIRE(counts10.train == 6);
    REQUIRE(counts10.test == 2);
    REQUIRE(counts10.val == 2);

    auto counts5 = dx::split_counts(5);
    REQUIRE(counts5.train == 3);
    REQUIRE(counts5.test == 1);
    REQUIRE(counts5.val == 1);

    REQUIRE_THROWS_AS(dx::split_counts(4), DataError);

    for (std::size_t n : {5u, 7u, 10u, 33u, 100u, 701u}) {
        auto c = dx::split_counts(n);
        REQUIRE(c.train + c.test + c.val == n);
        REQUIRE(c.train >= 1);
        REQUIRE(c.test >= 1);
        REQUIRE(c.val >= 1);
    }
}

TEST_CASE("split is a chronological partition") {
    auto samples = dx::make_windows(ramp_dataset(40), 10, 2);
    auto split = dx::split_dataset(samples);
    REQUIRE(split.train.size() + split.test.size() + split.val.size() == samples.size());
    REQUIRE(split.train.back().anchor < split.test.front().anchor);
    REQUIRE(split.test.back().anchor < split.val.front().anchor);
    REQUIRE(split.train.back().target_date.month <= split.test.front().target_date.month);
    // anchors strictly increase within each part
    for (auto* part : {&split.train, &split.test, &split.val})
        for (std::size_t i = 1; i < part->size(); ++i)
            REQUIRE((*part)[i - 1].anchor < (*part)[i].anchor);
}

TEST_CASE("experiment scalers see only training days") {
    SeriesDataset data = ramp_dataset(40);  // strictly rising y
    auto ex = dx::prepare_experiment(data, 10, 2);
    // Training rows end at the last training target; later values scale past 1.
    std::size_t last_train_day = ex.split.train.back().anchor + 1;
    REQUIRE(ex.scalers.y.max == data[last_train_day].y);
    REQUIRE(ex.scalers.y.apply(data[last_train_day].y) == 1.0);
    REQUIRE(ex.split.val.back().target > 1.0);
    REQUIRE(ex.split.train.front().history.front() == 0.0);
    // feature windows stay raw
    REQUIRE(ex.split.train.front().feature_window[0][0] >= 10.0);
}

TEST_CASE("generator with everything off emits the base level") {
    GeneratorSpec spec;
    spec.length = 50;
    spec.weekly = {0, 0, 0, 0, 0, 0, 0};
    spec.weekend_quad_coeff = 0.0;
    spec.workday_slope = 0.0;
    spec.weather_effects.assign(15, 0.0);
    spec.holiday_effects.assign(5, 0.0);
    spec.ar_coeff = 0.0;
    spec.noise_scale = 0.0;
    auto out = dx::generate_synthetic(spec);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        REQUIRE(out.data[i].y == spec.base);
        REQUIRE(out.log.total[i] == spec.base);
    }
}

TEST_CASE("generator is bitwise deterministic per seed") {
    GeneratorSpec spec;
    spec.length = 120;
    spec.seed = 77;
    auto a = dx::generate_synthetic(spec);
    auto b = dx::generate_synthetic(spec);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        REQUIRE(a.data[i].y == b.data[i].y);
        REQUIRE(a.data[i].temperature == b.data[i].temperature);
        REQUIRE(a.data[i].weather == b.data[i].weather);
        REQUIRE(a.data[i].holiday == b.data[i].holiday);
        REQUIRE(a.log.noise[i] == b.log.noise[i]);
    }
    spec.seed = 78;
    auto c = dx::generate_synthetic(spec);
    bool differ = false;
    for (std::size_t i = 0; i < a.data.size(); ++i) differ |= (a.data[i].y != c.data[i].y);
    REQUIRE(differ);
}

TEST_CASE("series equals the sum of logged effects exactly") {
    GeneratorSpec spec;
    spec.length = 365;
    spec.seed = 9;
    auto out = dx::generate_synthetic(spec);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const auto& lg = out.log;
        double total = lg.base[i] + lg.weekly[i] + lg.temp_effect[i] + lg.weather_effect[i] +
                       lg.holiday_lead[i] + lg.holiday_lag[i] + lg.noise[i];
        REQUIRE(total == lg.total[i]);  // bitwise: same summation order
        REQUIRE(out.data[i].y == static_cast<double>(std::llround(std::max(0.0, total))));
    }
}

TEST_CASE("weekend temperature effect is the planted quadratic") {
    GeneratorSpec spec;
    spec.length = 730;
    spec.seed = 4;
    auto out = dx::generate_synthetic(spec);
    // On weekends the logged effect must equal coeff * (t - vertex)^2; its
    // correlation with (t - vertex)^2 is exactly -1 for a negative coeff.
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (!dx::is_weekend(out.data[i].week)) continue;
        double d = out.data[i].temperature - spec.weekend_quad_vertex;
        double x = d * d;
        double y = out.log.temp_effect[i];
        REQUIRE(y <= 0.0);
        sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
        ++n;
    }
    REQUIRE(n > 100);
    double num = static_cast<double>(n) * sxy - sx * sy;
    double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    REQUIRE(num / den < -0.999999);
}

TEST_CASE("temperatures respect the declared range") {
    GeneratorSpec spec;
    spec.length = 730;
    spec.seed = 123;
    spec.temp_noise = 10.0;  // provoke the clamp
    auto out = dx::generate_synthetic(spec);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        REQUIRE(out.data[i].temperature >= spec.temp_min);
        REQUIRE(out.data[i].temperature <= spec.temp_max);
    }
}

TEST_CASE("generator validates its tables") {
    GeneratorSpec spec;
    spec.weather_probs.pop_back();
    REQUIRE_THROWS_AS(dx::generate_synthetic(spec), dx::ValueError);

    GeneratorSpec bad_prob;
    bad_prob.weather_probs.assign(15, 0.2);  // sums to 3
    REQUIRE_THROWS_AS(dx::generate_synthetic(bad_prob), dx::ValueError);

    GeneratorSpec neg;
    neg.noise_scale = -1.0;
    REQUIRE_THROWS_AS(dx::generate_synthetic(neg), dx::ValueError);
}

TEST_CASE("week column always matches the calendar") {
    GeneratorSpec spec;
    spec.length = 30;
    spec.start_date = Date{2021, 9, 15};  // a Wednesday
    auto out = dx::generate_synthetic(spec);
    REQUIRE(out.data[0].week == 2);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        REQUIRE(out.data[i].week == dx::day_of_week(out.data[i].date));
}
