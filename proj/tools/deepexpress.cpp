// Command-line front end: data generation, training, prediction,
// evaluation, grid search and the ablation study, all reading and writing
// plain text files.

#include <CLI11.hpp>

#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <deepexpress/deepexpress.hpp>

namespace {

// ---- config translation ----------------------------------------------------

dx::ModelConfig model_from_config(const dx::ConfigFile& cfg) {
    dx::ModelConfig mc;
    mc.variant = dx::variant_from_name(cfg.get_string("variant", "full"));
    mc.history_len = cfg.get_size("history_len", mc.history_len);
    mc.half_window = cfg.get_size("half_window", mc.half_window);
    mc.horizon = cfg.get_size("horizon", mc.horizon);
    mc.enc_hidden = cfg.get_size("enc_hidden", mc.enc_hidden);
    mc.dec_hidden = cfg.get_size("dec_hidden", mc.enc_hidden);
    mc.score_dim = cfg.get_size("score_dim", mc.score_dim);
    mc.head_hidden = cfg.get_size("head_hidden", mc.head_hidden);
    mc.embedding_dim = cfg.get_size("embedding_dim", mc.embedding_dim);
    mc.workday_hidden = cfg.get_size("workday_hidden", mc.workday_hidden);
    mc.dropout_rate = cfg.get_double("dropout_rate", mc.dropout_rate);
    mc.output_activation = dx::activation_from_name(
        cfg.get_string("output_activation", dx::activation_name(mc.output_activation)));
    mc.loss = dx::loss_from_name(cfg.get_string("loss", dx::loss_name(mc.loss)));
    return mc;
}

dx::TrainConfig train_from_config(const dx::ConfigFile& cfg) {
    dx::TrainConfig tc;
    tc.epochs = cfg.get_size("epochs", tc.epochs);
    tc.batch_size = cfg.get_size("batch_size", tc.batch_size);
    tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
    tc.beta1 = cfg.get_double("beta1", tc.beta1);
    tc.beta2 = cfg.get_double("beta2", tc.beta2);
    tc.eps = cfg.get_double("epsilon", tc.eps);
    tc.seed = cfg.get_u64("seed", tc.seed);
    tc.patience = cfg.get_size("patience", tc.patience);
    tc.loss = dx::loss_from_name(cfg.get_string("loss", dx::loss_name(tc.loss)));
    return tc;
}

dx::GeneratorSpec generator_from_config(const dx::ConfigFile& cfg) {
    dx::GeneratorSpec g;
    g.length = cfg.get_size("length", g.length);
    g.seed = cfg.get_u64("seed", g.seed);
    g.start_date = dx::parse_date(cfg.get_string("start_date", dx::format_date(g.start_date)));
    g.base = cfg.get_double("base", g.base);
    std::vector<double> weekly(g.weekly.begin(), g.weekly.end());
    weekly = cfg.get_double_list("weekly", weekly);
    if (weekly.size() != 7)
        throw dx::ConfigError("key 'weekly': expected 7 values, got " +
                              std::to_string(weekly.size()));
    std::copy(weekly.begin(), weekly.end(), g.weekly.begin());
    g.temp_mean = cfg.get_double("temp_mean", g.temp_mean);
    g.temp_amplitude = cfg.get_double("temp_amplitude", g.temp_amplitude);
    g.temp_phase_days = cfg.get_double("temp_phase_days", g.temp_phase_days);
    g.temp_noise = cfg.get_double("temp_noise", g.temp_noise);
    g.weekend_quad_coeff = cfg.get_double("weekend_quad_coeff", g.weekend_quad_coeff);
    g.weekend_quad_vertex = cfg.get_double("weekend_quad_vertex", g.weekend_quad_vertex);
    g.workday_slope = cfg.get_double("workday_slope", g.workday_slope);
    g.ar_coeff = cfg.get_double("ar_coeff", g.ar_coeff);
    g.noise_scale = cfg.get_double("noise_scale", g.noise_scale);
    return g;
}

dx::GridSpec grid_from_config(const dx::ConfigFile& cfg) {
    dx::GridSpec grid;
    grid.history_len = cfg.get_size_list("history_len", {21});
    grid.half_window = cfg.get_size_list("half_window", {3});
    grid.horizon = cfg.get_size_list("horizon", {1});
    grid.hidden = cfg.get_size_list("hidden", {32});
    grid.batch_size = cfg.get_size_list("batch_size", {64});
    grid.epochs = cfg.get_size_list("epochs", {30});
    return grid;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw dx::ConfigError("bad seed '" + tok + "' in '" + text + "'");
        }
    }
    if (seeds.empty()) throw dx::ConfigError("empty seed list");
    return seeds;
}

// ---- report files ------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw dx::DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw dx::DataError("write failed for '" + path + "'");
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// Evaluation report: per-step table plus the pooled aggregate, scaled
// metrics first to match the magnitudes forecasting papers quote.
std::string eval_report_text(const dx::EvalReport& rep, const std::string& data_path) {
    std::string s;
    s += fmt("model        %s\n", rep.name.c_str());
    s += fmt("data         %s\n", data_path.c_str());
    if (!rep.config_echo.empty()) s += fmt("config       %s\n", rep.config_echo.c_str());
    s += fmt("anchors      %zu\n", rep.samples);
    s += fmt("horizon      %zu\n\n", rep.horizon);
    s += "step   rmse(scaled)   mae(scaled)     rmse(raw)      mae(raw)\n";
    for (std::size_t j = 0; j < rep.per_step_scaled.size(); ++j)
        s += fmt("%4zu   %12.6f  %12.6f  %12.3f  %12.3f\n", j + 1, rep.per_step_scaled[j].rmse,
                 rep.per_step_scaled[j].mae, rep.per_step_raw[j].rmse, rep.per_step_raw[j].mae);
    s += fmt(" all   %12.6f  %12.6f  %12.3f  %12.3f\n", rep.aggregate_scaled.rmse,
             rep.aggregate_scaled.mae, rep.aggregate_raw.rmse, rep.aggregate_raw.mae);
    return s;
}

std::string eval_report_csv(const dx::EvalReport& rep) {
    std::string s = "step,rmse_scaled,mae_scaled,rmse_raw,mae_raw\n";
    for (std::size_t j = 0; j < rep.per_step_scaled.size(); ++j)
        s += fmt("%zu,%.17g,%.17g,%.17g,%.17g\n", j + 1, rep.per_step_scaled[j].rmse,
                 rep.per_step_scaled[j].mae, rep.per_step_raw[j].rmse, rep.per_step_raw[j].mae);
    s += fmt("all,%.17g,%.17g,%.17g,%.17g\n", rep.aggregate_scaled.rmse, rep.aggregate_scaled.mae,
             rep.aggregate_raw.rmse, rep.aggregate_raw.mae);
    return s;
}

std::string grid_report_text(const std::vector<dx::GridRow>& rows, const std::string& data_path) {
    std::string s = fmt("grid search over %zu cells on %s\n\n", rows.size(), data_path.c_str());
    s += "rank  history  window  horizon  hidden  batch  epochs    val rmse     val mae   note\n";
    std::size_t rank = 0;
    for (const auto& r : rows) {
        if (r.skipped)
            s += fmt("   -  %7zu  %6zu  %7zu  %6zu  %5zu  %6zu  %10s  %10s   skipped: %s\n",
                     r.history_len, r.half_window, r.horizon, r.hidden, r.batch_size, r.epochs,
                     "-", "-", r.reason.c_str());
        else
            s += fmt("%4zu  %7zu  %6zu  %7zu  %6zu  %5zu  %6zu  %10.6f  %10.6f\n", ++rank,
                     r.history_len, r.half_window, r.horizon, r.hidden, r.batch_size, r.epochs,
                     r.val_rmse, r.val_mae);
    }
    return s;
}

std::string grid_report_csv(const std::vector<dx::GridRow>& rows) {
    std::string s = "rank,history_len,half_window,horizon,hidden,batch_size,epochs,val_rmse,val_mae,note\n";
    std::size_t rank = 0;
    for (const auto& r : rows) {
        if (r.skipped)
            s += fmt(",%zu,%zu,%zu,%zu,%zu,%zu,,,\"skipped: %s\"\n", r.history_len,
                     r.half_window, r.horizon, r.hidden, r.batch_size, r.epochs,
                     r.reason.c_str());
        else
            s += fmt("%zu,%zu,%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,\n", ++rank, r.history_len,
                     r.half_window, r.horizon, r.hidden, r.batch_size, r.epochs, r.val_rmse,
                     r.val_mae);
    }
    return s;
}

std::string ablation_report_text(const std::vector<dx::AblationEntry>& table,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& data_path) {
    std::string s = fmt("ablation on %s, %zu seed(s)\n\n", data_path.c_str(), seeds.size());
    s += "model             mean rmse    mean mae   mean rmse    mean mae   runs\n";
    s += "                   (scaled)    (scaled)       (raw)       (raw)\n";
    for (const auto& e : table) {
        if (e.runs.empty()) {
            s += fmt("%-16s %11s %11s %11s %11s   0\n", e.name.c_str(), "-", "-", "-", "-");
            continue;
        }
        s += fmt("%-16s %11.6f %11.6f %11.3f %11.3f   %zu\n", e.name.c_str(), e.mean_scaled.rmse,
                 e.mean_scaled.mae, e.mean_raw.rmse, e.mean_raw.mae, e.runs.size());
    }
    bool any_error = false;
    for (const auto& e : table) any_error = any_error || !e.errors.empty();
    if (any_error) {
        s += "\nfailures:\n";
        for (const auto& e : table)
            for (const auto& err : e.errors) s += fmt("  %s: %s\n", e.name.c_str(), err.c_str());
    }
    return s;
}

std::string ablation_report_csv(const std::vector<dx::AblationEntry>& table) {
    std::string s = "model,seed,rmse_scaled,mae_scaled,rmse_raw,mae_raw\n";
    for (const auto& e : table) {
        for (const auto& r : e.runs) {
            std::string seed = r.seeds.empty() ? "" : std::to_string(r.seeds[0]);
            s += fmt("%s,%s,%.17g,%.17g,%.17g,%.17g\n", e.name.c_str(), seed.c_str(),
                     r.aggregate_scaled.rmse, r.aggregate_scaled.mae, r.aggregate_raw.rmse,
                     r.aggregate_raw.mae);
        }
        if (!e.runs.empty())
            s += fmt("%s,mean,%.17g,%.17g,%.17g,%.17g\n", e.name.c_str(), e.mean_scaled.rmse,
                     e.mean_scaled.mae, e.mean_raw.rmse, e.mean_raw.mae);
    }
    return s;
}

std::string config_echo(const dx::ModelConfig& c) {
    return fmt("variant=%s h=%zu l=%zu k=%zu enc=%zu dec=%zu e=%zu dropout=%g",
               dx::variant_name(c.variant), c.history_len, c.half_window, c.horizon,
               c.enc_hidden, c.dec_hidden, c.embedding_dim, c.dropout_rate);
}

// ---- subcommands ---------------------------------------------------------------

int cmd_gen_data(const std::string& spec_path, const std::string& out_path, long long seed) {
    dx::ConfigFile cfg =
        spec_path.empty() ? dx::ConfigFile() : dx::ConfigFile::load(spec_path);
    dx::GeneratorSpec g = generator_from_config(cfg);
    cfg.reject_unknown();
    if (seed >= 0) g.seed = static_cast<std::uint64_t>(seed);
    dx::SyntheticSeries series = dx::generate_synthetic(g);
    dx::write_csv(series.data, out_path);
    std::printf("wrote %zu days to %s (seed %llu)\n", series.data.size(), out_path.c_str(),
                static_cast<unsigned long long>(g.seed));
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& out_path) {
    dx::ConfigFile cfg =
        config_path.empty() ? dx::ConfigFile() : dx::ConfigFile::load(config_path);
    dx::ModelConfig mc = model_from_config(cfg);
    dx::TrainConfig tc = train_from_config(cfg);
    cfg.reject_unknown();

    dx::SeriesDataset data = dx::load_csv(data_path);
    dx::Experiment exp = dx::prepare_experiment(data, mc.history_len, mc.half_window);
    dx::DeepExpressModel model = dx::init_params(mc, tc.seed);
    dx::TrainResult res = dx::train(model, exp.split.train, exp.split.val, exp.scalers, tc);
    dx::checkpoint_save(model, out_path);

    std::printf("trained %s on %zu samples (val %zu) for %zu epoch(s)\n",
                dx::variant_name(model.config.variant), exp.split.train.size(),
                exp.split.val.size(), res.train_loss.size());
    std::printf("final train loss %.6g, best val loss %.6g at epoch %zu\n",
                res.train_loss.back(), res.best_val, res.best_epoch + 1);
    std::printf("checkpoint written to %s\n", out_path.c_str());
    return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& data_path, std::size_t horizon,
                const std::string& out_path, long long anchor_arg) {
    dx::DeepExpressModel model = dx::checkpoint_load(ckpt_path);
    dx::SeriesDataset data = dx::load_csv(data_path);
    const std::size_t h = model.config.history_len;
    const std::size_t l = model.config.half_window;
    const std::size_t k = horizon == 0 ? model.config.horizon : horizon;

    // Latest anchor whose whole forecast keeps both truth and features
    // inside the series, unless the caller pins one explicitly.
    if (data.size() < h + k + l + 1)
        throw dx::DataError(fmt("series of %zu days is too short: need at least %zu for "
                                "history %zu + horizon %zu + feature margin %zu",
                                data.size(), h + k + l + 1, h, k, l));
    std::size_t anchor = data.size() - 1 - k - l;
    if (anchor_arg >= 0) {
        anchor = static_cast<std::size_t>(anchor_arg);
        if (anchor + 1 < h)
            throw dx::DataError(fmt("anchor %zu leaves fewer than %zu history days", anchor, h));
        if (!dx::anchor_evaluable(anchor, k, l, data.size()))
            throw dx::DataError(fmt("anchor %zu needs days through %zu, series ends at %zu",
                                    anchor, anchor + k + l, data.size() - 1));
    }

    dx::Experiment exp = dx::prepare_experiment(data, h, l);
    std::vector<double> history;
    for (std::size_t i = anchor + 1 - h; i <= anchor; ++i) history.push_back(data[i].y);
    std::vector<double> forecast = dx::predict_sequence(
        model, exp.scalers, history, anchor, dx::dataset_features(data, l), k);

    std::string csv = "date,y_true,y_pred\n";
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t day = anchor + 1 + j;
        csv += fmt("%s,%.17g,%.17g\n", dx::format_date(data[day].date).c_str(), data[day].y,
                   forecast[j]);
    }
    write_text_file(out_path, csv);
    std::printf("wrote %zu forecast row(s) to %s (anchor day %zu, %s)\n", k, out_path.c_str(),
                anchor, dx::format_date(data[anchor].date).c_str());
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& report_path, std::size_t horizon) {
    dx::DeepExpressModel model = dx::checkpoint_load(ckpt_path);
    dx::SeriesDataset data = dx::load_csv(data_path);
    const std::size_t k = horizon == 0 ? model.config.horizon : horizon;
    dx::Experiment exp =
        dx::prepare_experiment(data, model.config.history_len, model.config.half_window);
    dx::EvalReport rep = dx::evaluate_rollouts(model, data, exp.split.test, exp.scalers, k);
    rep.config_echo = config_echo(model.config);

    write_text_file(report_path, eval_report_text(rep, data_path));
    write_text_file(report_path + ".csv", eval_report_csv(rep));
    std::printf("evaluated %s on %zu test anchor(s): scaled rmse %.6f mae %.6f\n",
                rep.name.c_str(), rep.samples, rep.aggregate_scaled.rmse,
                rep.aggregate_scaled.mae);
    std::printf("report written to %s (+.csv)\n", report_path.c_str());
    return 0;
}

int cmd_grid_search(const std::string& data_path, const std::string& grid_path,
                    const std::string& report_path) {
    dx::ConfigFile cfg = dx::ConfigFile::load(grid_path);
    dx::GridSpec grid = grid_from_config(cfg);
    // The grid file may also pin the knobs the sweep itself does not cover;
    // the swept ones (history_len, hidden, batch_size, ...) are lists above.
    dx::ModelConfig base;
    base.variant = dx::variant_from_name(cfg.get_string("variant", "full"));
    base.embedding_dim = cfg.get_size("embedding_dim", base.embedding_dim);
    base.workday_hidden = cfg.get_size("workday_hidden", base.workday_hidden);
    base.dropout_rate = cfg.get_double("dropout_rate", base.dropout_rate);
    base.output_activation = dx::activation_from_name(
        cfg.get_string("output_activation", dx::activation_name(base.output_activation)));
    base.loss = dx::loss_from_name(cfg.get_string("loss", dx::loss_name(base.loss)));
    dx::TrainConfig tc;
    tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
    tc.beta1 = cfg.get_double("beta1", tc.beta1);
    tc.beta2 = cfg.get_double("beta2", tc.beta2);
    tc.eps = cfg.get_double("epsilon", tc.eps);
    tc.seed = cfg.get_u64("seed", tc.seed);
    tc.patience = cfg.get_size("patience", tc.patience);
    tc.loss = base.loss;
    cfg.reject_unknown();

    dx::SeriesDataset data = dx::load_csv(data_path);
    std::vector<dx::GridRow> rows = dx::grid_search(data, grid, base, tc);

    write_text_file(report_path, grid_report_text(rows, data_path));
    write_text_file(report_path + ".csv", grid_report_csv(rows));
    std::size_t evaluated = 0;
    for (const auto& r : rows) evaluated += r.skipped ? 0 : 1;
    std::printf("searched %zu cell(s), %zu evaluated\n", rows.size(), evaluated);
    if (evaluated > 0)
        std::printf("best: h=%zu l=%zu k=%zu hidden=%zu batch=%zu epochs=%zu val rmse %.6f\n",
                    rows[0].history_len, rows[0].half_window, rows[0].horizon, rows[0].hidden,
                    rows[0].batch_size, rows[0].epochs, rows[0].val_rmse);
    std::printf("report written to %s (+.csv)\n", report_path.c_str());
    return 0;
}

int cmd_ablate(const std::string& data_path, const std::string& config_path,
               const std::string& seeds_text, const std::string& report_path) {
    dx::ConfigFile cfg =
        config_path.empty() ? dx::ConfigFile() : dx::ConfigFile::load(config_path);
    dx::ModelConfig base = model_from_config(cfg);
    dx::TrainConfig tc = train_from_config(cfg);

    dx::AblationOptions opts;
    if (cfg.has("variants")) {
        opts.variants.clear();
        std::string tok;
        std::istringstream in(cfg.get_string("variants", ""));
        while (std::getline(in, tok, ',')) {
            tok = dx::detail::trim(tok);
            if (!tok.empty()) opts.variants.push_back(dx::variant_from_name(tok));
        }
        if (opts.variants.empty()) throw dx::ConfigError("key 'variants': empty list");
    } else {
        (void)cfg.get_string("variants", "");
    }
    opts.baselines = cfg.get_string("baselines", "true") != "false";
    opts.seasonal_period = cfg.get_size("seasonal_period", opts.seasonal_period);
    opts.ar_order = cfg.get_size("ar_order", opts.ar_order);
    cfg.reject_unknown();

    std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);
    dx::SeriesDataset data = dx::load_csv(data_path);
    std::vector<dx::AblationEntry> table = dx::run_ablation(data, base, tc, seeds, opts);

    write_text_file(report_path, ablation_report_text(table, seeds, data_path));
    write_text_file(report_path + ".csv", ablation_report_csv(table));
    for (const auto& e : table)
        if (!e.runs.empty())
            std::printf("%-16s mean scaled rmse %.6f over %zu run(s)\n", e.name.c_str(),
                        e.mean_scaled.rmse, e.runs.size());
    std::printf("report written to %s (+.csv)\n", report_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeepExpress: attention seq2seq forecasting for daily delivery counts"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic daily series CSV");
    std::string gen_spec, gen_out = "data.csv";
    long long gen_seed = -1;
    gen->add_option("--spec", gen_spec, "Generator spec file (key = value)");
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--seed", gen_seed, "Override the spec's seed");

    auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
    std::string train_data, train_config, train_out = "model.ckpt";
    train->add_option("--data", train_data, "Series CSV")->required();
    train->add_option("--config", train_config, "Model/training config file");
    train->add_option("--out", train_out, "Checkpoint path")->required();

    auto* predict = app.add_subcommand("predict", "Roll out a forecast from a checkpoint");
    std::string pred_ckpt, pred_data, pred_out = "forecast.csv";
    std::size_t pred_horizon = 0;
    long long pred_anchor = -1;
    predict->add_option("--ckpt", pred_ckpt, "Checkpoint path")->required();
    predict->add_option("--data", pred_data, "Series CSV")->required();
    predict->add_option("--horizon", pred_horizon, "Steps to forecast (default: checkpoint's)");
    predict->add_option("--anchor", pred_anchor, "Forecast from this day index (default: latest)");
    predict->add_option("--out", pred_out, "Output CSV path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
    std::string eval_ckpt, eval_data, eval_report = "report.txt";
    std::size_t eval_horizon = 0;
    evaluate->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    evaluate->add_option("--data", eval_data, "Series CSV")->required();
    evaluate->add_option("--horizon", eval_horizon, "Rollout length (default: checkpoint's)");
    evaluate->add_option("--report", eval_report, "Report path (CSV twin gets .csv)")->required();

    auto* grid = app.add_subcommand("grid-search", "Sweep hyperparameters, rank by val RMSE");
    std::string grid_data, grid_file, grid_report = "grid.txt";
    grid->add_option("--data", grid_data, "Series CSV")->required();
    grid->add_option("--grid", grid_file, "Grid file with candidate lists")->required();
    grid->add_option("--report", grid_report, "Report path (CSV twin gets .csv)")->required();

    auto* ablate = app.add_subcommand("ablate", "Train all variants and baselines, compare");
    std::string abl_data, abl_config, abl_seeds = "1,2,3,4,5", abl_report = "ablation.txt";
    ablate->add_option("--data", abl_data, "Series CSV")->required();
    ablate->add_option("--config", abl_config, "Model/training config file");
    ablate->add_option("--seeds", abl_seeds, "Comma-separated seeds");
    ablate->add_option("--report", abl_report, "Report path (CSV twin gets .csv)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_spec, gen_out, gen_seed);
        if (train->parsed()) return cmd_train(train_data, train_config, train_out);
        if (predict->parsed())
            return cmd_predict(pred_ckpt, pred_data, pred_horizon, pred_out, pred_anchor);
        if (evaluate->parsed()) return cmd_evaluate(eval_ckpt, eval_data, eval_report, eval_horizon);
        if (grid->parsed()) return cmd_grid_search(grid_data, grid_file, grid_report);
        if (ablate->parsed()) return cmd_ablate(abl_data, abl_config, abl_seeds, abl_report);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
