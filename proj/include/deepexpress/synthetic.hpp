#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dx {

/**
 * Synthetic daily parcel series with planted, recoverable structure:
 * a weekly profile, a temperature response that is quadratic on weekends
 * and linear on workdays, additive per-weather-category effects, holiday
 * effects smeared over lead (anticipation) and lag (hysteresis) kernels,
 * and AR(1) noise. Every term is logged per day so tests can reconstruct
 * the series exactly.
 */
struct GeneratorSpec {
    std::size_t length = 730;
    std::uint64_t seed = 1;
    Date start_date{2016, 1, 4};  // a Monday

    double base = 2000.0;
    std::array<double, 7> weekly{250.0, 120.0, 60.0, 90.0, 180.0, -350.0, -520.0};

    // Temperature path: seasonal sinusoid plus noise, clamped to the
    // -5..40 C range the features are specified over.
    double temp_mean = 17.5;
    double temp_amplitude = 17.5;
    double temp_phase_days = -105.0;  // shifts the peak into midsummer
    double temp_noise = 2.5;
    double temp_min = -5.0;
    double temp_max = 40.0;

    // Demand response to temperature.
    double weekend_quad_coeff = -1.3;   // coefficient on (temp - vertex)^2
    double weekend_quad_vertex = 19.0;  // comfortable-weather peak
    double workday_slope = -6.0;        // linear in (temp - temp_mean)

    // Weather: category draw probabilities and additive effects.
    std::vector<double> weather_probs{0.28, 0.22, 0.14, 0.09, 0.05, 0.03, 0.04, 0.02,
                                      0.03, 0.02, 0.01, 0.01, 0.03, 0.02, 0.01};
    std::vector<double> weather_effects{0.0,    -15.0,  -30.0,  -80.0,  -160.0,
                                        -420.0, -120.0, -500.0, -150.0, -320.0,
                                        -650.0, -380.0, -120.0, -60.0,  -200.0};

    // Holiday: per-day draw probabilities for categories 1.. (0 = ordinary
    // takes the remainder) and additive effects per category.
    std::vector<double> holiday_probs{0.0, 0.025, 0.035, 0.02, 0.01};
    std::vector<double> holiday_effects{0.0, 1200.0, 500.0, -650.0, 350.0};

    // lead_kernel[j-1] weights a holiday j days in the future (anticipation);
    // lag_kernel[j] weights a holiday j days in the past, j = 0 being the
    // day itself. Negative lag taps after a closure give the rebound.
    std::vector<double> lead_kernel{0.45, 0.25, 0.12};
    std::vector<double> lag_kernel{1.0, -0.35, -0.55, -0.3};

    double ar_coeff = 0.55;
    double noise_scale = 55.0;  // innovation standard deviation

    void validate() const {
        if (length == 0) throw ValueError("generator: length must be positive");
        if (weather_probs.size() != 15 || weather_effects.size() != 15)
            throw ValueError("generator: weather tables must have 15 entries");
        if (holiday_probs.size() != 5 || holiday_effects.size() != 5)
            throw ValueError("generator: holiday tables must have 5 entries");
        double p = 0.0;
        for (double x : weather_probs) {
            if (!(x >= 0.0)) throw ValueError("generator: negative weather probability");
            p += x;
        }
        if (p > 1.0 + 1e-9) throw ValueError("generator: weather probabilities exceed 1");
        p = 0.0;
        for (std::size_t i = 1; i < holiday_probs.size(); ++i) {
            if (!(holiday_probs[i] >= 0.0))
                throw ValueError("generator: negative holiday probability");
            p += holiday_probs[i];
        }
        if (p > 1.0 + 1e-9) throw ValueError("generator: holiday probabilities exceed 1");
        for (double x : weather_effects)
            if (!std::isfinite(x)) throw ValueError("generator: non-finite weather effect");
        for (double x : holiday_effects)
            if (!std::isfinite(x)) throw ValueError("generator: non-finite holiday effect");
        for (double x : lead_kernel)
            if (!std::isfinite(x)) throw ValueError("generator: non-finite lead kernel");
        for (double x : lag_kernel)
            if (!std::isfinite(x)) throw ValueError("generator: non-finite lag kernel");
        if (!(noise_scale >= 0.0)) throw ValueError("generator: noise scale must be >= 0");
        if (!(temp_noise >= 0.0)) throw ValueError("generator: temp noise must be >= 0");
    }
};

/** Per-day additive terms, in the exact order they are summed. */
struct EffectLog {
    std::vector<double> base;
    std::vector<double> weekly;
    std::vector<double> temp_effect;
    std::vector<double> weather_effect;
    std::vector<double> holiday_lead;
    std::vector<double> holiday_lag;
    std::vector<double> noise;
    std::vector<double> total;  // sum of the above, before flooring/rounding
};

struct SyntheticSeries {
    SeriesDataset data;
    EffectLog log;
};

inline SyntheticSeries generate_synthetic(const GeneratorSpec& spec) {
    spec.validate();
    const std::size_t T = spec.length;

    // Independent substreams so changing one knob never shifts the others.
    Rng temp_rng(spec.seed, 1);
    Rng weather_rng(spec.seed, 2);
    Rng holiday_rng(spec.seed, 3);
    Rng noise_rng(spec.seed, 4);

    std::vector<int> dow(T), weather(T), holiday(T);
    std::vector<double> temps(T);
    for (std::size_t i = 0; i < T; ++i) {
        Date date = add_days(spec.start_date, static_cast<long>(i));
        dow[i] = day_of_week(date);

        double seasonal = spec.temp_mean +
                          spec.temp_amplitude *
                              std::sin(2.0 * 3.141592653589793 *
                                       (static_cast<double>(i) + spec.temp_phase_days) / 365.25);
        double t = seasonal + spec.temp_noise * temp_rng.normal();
        temps[i] = std::min(spec.temp_max, std::max(spec.temp_min, t));

        double u = weather_rng.uniform();
        int w = 0;
        double acc = 0.0;
        for (std::size_t c = 0; c < spec.weather_probs.size(); ++c) {
            acc += spec.weather_probs[c];
            if (u < acc) {
                w = static_cast<int>(c);
                break;
            }
        }
        weather[i] = w;

        double uh = holiday_rng.uniform();
        int hcat = 0;
        acc = 0.0;
        for (std::size_t c = 1; c < spec.holiday_probs.size(); ++c) {
            acc += spec.holiday_probs[c];
            if (uh < acc) {
                hcat = static_cast<int>(c);
                break;
            }
        }
        holiday[i] = hcat;
    }

    EffectLog log;
    for (auto* v : {&log.base, &log.weekly, &log.temp_effect, &log.weather_effect,
                    &log.holiday_lead, &log.holiday_lag, &log.noise, &log.total})
        v->resize(T);

    std::vector<DailyRecord> rows(T);
    double ar_state = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        double temp_eff;
        if (is_weekend(dow[i])) {
            double dtv = temps[i] - spec.weekend_quad_vertex;
            temp_eff = spec.weekend_quad_coeff * dtv * dtv;
        } else {
            temp_eff = spec.workday_slope * (temps[i] - spec.temp_mean);
        }

        double lead = 0.0;
        for (std::size_t j = 1; j <= spec.lead_kernel.size(); ++j) {
            if (i + j >= T) break;
            lead += spec.lead_kernel[j - 1] * spec.holiday_effects[holiday[i + j]];
        }
        double lag = 0.0;
        for (std::size_t j = 0; j < spec.lag_kernel.size(); ++j) {
            if (j > i) break;
            lag += spec.lag_kernel[j] * spec.holiday_effects[holiday[i - j]];
        }

        ar_state = spec.ar_coeff * ar_state + spec.noise_scale * noise_rng.normal();

        log.base[i] = spec.base;
        log.weekly[i] = spec.weekly[static_cast<std::size_t>(dow[i])];
        log.temp_effect[i] = temp_eff;
        log.weather_effect[i] = spec.weather_effects[static_cast<std::size_t>(weather[i])];
        log.holiday_lead[i] = lead;
        log.holiday_lag[i] = lag;
        log.noise[i] = ar_state;
        log.total[i] = log.base[i] + log.weekly[i] + log.temp_effect[i] +
                       log.weather_effect[i] + log.holiday_lead[i] + log.holiday_lag[i] +
                       log.noise[i];

        DailyRecord& r = rows[i];
        r.date = add_days(spec.start_date, static_cast<long>(i));
        r.y = static_cast<double>(std::llround(std::max(0.0, log.total[i])));
        r.temperature = temps[i];
        r.weather = weather[i];
        r.holiday = holiday[i];
        r.week = dow[i];
    }
    return SyntheticSeries{SeriesDataset(std::move(rows)), std::move(log)};
}

}  // namespace dx
