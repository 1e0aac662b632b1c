// Integration tests driving the oraclelab binary end to end.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "oracle/datastore.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "oraclelab_cli_tests";

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = kRoot / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(ORACLELAB_CLI_PATH) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string base_config(int devices, int frames, int sessions = 1,
                        const std::string& extra_classifier = "") {
    std::ostringstream os;
    os << R"({
  "seed": 5,
  "baseband": {"payload_symbols": 128},
  "devices": {"count": )" << devices << R"(},
  "channel": {"model": "rayleigh", "snr_db": 25.0, "min_gain": 0.3, "sessions": )"
       << sessions << R"(},
  "planner": {"snr_grid": [10, 40], "ber_bound": 1e-3, "bits_per_point": 10000,
              "iq_levels": 6, "dc_levels": 6, "n_required": 3},
  "classifier": {"max_epochs": 2, "batch_size": 32, "augment_copies": 0,
                 "val_fraction": 0.2)" << extra_classifier << R"(},
  "gen": {"frames_per_device": )" << frames << R"(}
})";
    return os.str();
}

}  // namespace

TEST_CASE("gen writes the expected trace groups and is byte-deterministic") {
    const fs::path dir = fresh_dir("gen");
    write_file(dir / "cfg.json", base_config(2, 20));

    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out1").string(),
                  dir / "log1.txt") == 0);
    const auto ds = oracle::io::load_dataset((dir / "out1" / "dataset.orcl").string());
    REQUIRE(ds.traces.size() == 2);  // 2 devices x 1 session
    CHECK(ds.traces[0].samples.size() == 20u * (64 + 128));
    CHECK(ds.traces[0].device_label == 0);
    CHECK(ds.traces[1].device_label == 1);

    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out2").string(),
                  dir / "log2.txt") == 0);
    CHECK(read_file(dir / "out1" / "dataset.orcl") == read_file(dir / "out2" / "dataset.orcl"));

    // a different seed changes the bytes
    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --seed 6 --out " +
                      (dir / "out3").string(),
                  dir / "log3.txt") == 0);
    CHECK(read_file(dir / "out1" / "dataset.orcl") != read_file(dir / "out3" / "dataset.orcl"));
}

TEST_CASE("16 devices x 2 sessions give 32 trace groups") {
    const fs::path dir = fresh_dir("gen32");
    write_file(dir / "cfg.json", base_config(16, 2, 2));
    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "log.txt") == 0);
    const auto ds = oracle::io::load_dataset((dir / "out" / "dataset.orcl").string());
    CHECK(ds.traces.size() == 32);
}

TEST_CASE("calibrate emits one CSV row per level") {
    const fs::path dir = fresh_dir("calibrate");
    write_file(dir / "cfg.json", base_config(2, 2));
    CHECK(run_cli("calibrate --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "log.txt") == 0);
    std::ifstream in(dir / "out" / "calibration.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "correction_real,correction_imag,main_tone_db,image_tone_db,immr_db");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 12);  // 6 iq + 6 dc levels
}

TEST_CASE("a broken config exits with code 2") {
    const fs::path dir = fresh_dir("badcfg");
    write_file(dir / "cfg.json", R"({"channel": {"model": "tropospheric"}})");
    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "log.txt") == 2);
    // missing required option is a usage/config error too
    CHECK(run_cli("gen", dir / "log2.txt") == 2);
}

TEST_CASE("an unreachable feasible-set size exits with code 3") {
    const fs::path dir = fresh_dir("infeasible");
    // Threshold far above any achievable pattern distance: only one member
    // can ever be admitted.
    std::string cfg = base_config(2, 2);
    cfg.replace(cfg.find("\"n_required\": 3"), 15, "\"n_required\": 5");
    cfg.replace(cfg.find("\"planner\": {"), 12, "\"planner\": {\"emd_threshold\": 9.0, ");
    write_file(dir / "cfg.json", cfg);
    CHECK(run_cli("plan --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "log.txt") == 3);
}

TEST_CASE("a diverging run exits with code 4") {
    const fs::path dir = fresh_dir("diverge");
    write_file(dir / "cfg.json", base_config(2, 8, 1, R"(, "learning_rate": 1e18)"));
    CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "gen.txt") == 0);
    CHECK(run_cli("train --config " + (dir / "cfg.json").string() + " --dataset " +
                      (dir / "out" / "dataset.orcl").string() + " --out " +
                      (dir / "out").string(),
                  dir / "train.txt") == 4);
}

TEST_CASE("plan then gen-with-allocation then train then eval runs clean") {
    const fs::path dir = fresh_dir("pipeline");
    write_file(dir / "cfg.json", base_config(3, 24));
    const std::string cfg = " --config " + (dir / "cfg.json").string();
    const fs::path out = dir / "out";

    CHECK(run_cli("plan" + cfg + " --out " + out.string(), dir / "plan.txt") == 0);
    CHECK(fs::exists(out / "map.json"));
    CHECK(fs::exists(out / "feasible_set.json"));
    CHECK(fs::exists(out / "allocation.json"));
    CHECK(fs::exists(out / "plan.csv"));
    CHECK(fs::exists(out / "ber_comparison.csv"));

    // planning again reuses the cached map
    CHECK(run_cli("plan" + cfg + " --out " + out.string(), dir / "plan2.txt") == 0);
    const json plan_report = json::parse(read_file(out / "plan_report.json"));
    CHECK(plan_report.at("metrics").at("map_reused").get<bool>());

    CHECK(run_cli("gen" + cfg + " --allocation " + (out / "allocation.json").string() +
                      " --out " + out.string(),
                  dir / "gen.txt") == 0);
    const auto ds = oracle::io::load_dataset((out / "dataset.orcl").string());
    bool any_commanded = false;
    for (const auto& t : ds.traces) any_commanded |= t.impairment.label.rfind("iq", 0) == 0 ||
                                                     t.impairment.label.rfind("dc", 0) == 0;
    CHECK(any_commanded);

    CHECK(run_cli("train" + cfg + " --dataset " + (out / "dataset.orcl").string() +
                      " --out " + out.string(),
                  dir / "train.txt") == 0);
    CHECK(fs::exists(out / "model.orcl"));
    CHECK(fs::exists(out / "training_log.csv"));

    CHECK(run_cli("eval" + cfg + " --model " + (out / "model.orcl").string() +
                      " --dataset " + (out / "dataset.orcl").string() + " --out " +
                      out.string(),
                  dir / "eval.txt") == 0);
    const json eval_report = json::parse(read_file(out / "eval_report.json"));
    CHECK(eval_report.at("metrics").at("accuracy").get<double>() >= 0.0);
    CHECK(eval_report.at("metrics").at("n_classes").get<int>() == 3);
    CHECK(fs::exists(out / "confusion.csv"));
}

namespace {

std::string fake_eval_report(double accuracy, int n_classes, const std::string& hash) {
    json j;
    j["kind"] = "experiment_report";
    j["experiment_id"] = "eval";
    j["config_hash"] = hash;
    j["metrics"] = json{{"accuracy", accuracy},
                        {"n_classes", n_classes},
                        {"windows", 100},
                        {"confusion", json::array()}};
    j["timings"] = json{{"total_s", 0.0}};
    return j.dump(2);
}

}  // namespace

TEST_CASE("report aggregates quartiles with the linear-interpolation rule") {
    const fs::path dir = fresh_dir("report");
    // accuracies {0.1..0.5}: quartiles must be 0.2 / 0.3 / 0.4
    std::string files;
    const double accs[5] = {0.3, 0.1, 0.5, 0.2, 0.4};
    for (int k = 0; k < 5; ++k) {
        const fs::path p = dir / ("r" + std::to_string(k) + ".json");
        write_file(p, fake_eval_report(accs[k], 4, "samehash"));
        files += " " + p.string();
    }
    CHECK(run_cli("report --out " + (dir / "out").string() + files, dir / "log.txt") == 0);

    std::ifstream in(dir / "out" / "accuracy_box.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "device_count,min,q1,median,q3,max,runs");
    CHECK(row == "4,0.1,0.2,0.3,0.4,0.5,5");
}

TEST_CASE("identical accuracies make a zero-width box; one report passes through") {
    const fs::path dir = fresh_dir("report_degenerate");
    std::string files;
    for (int k = 0; k < 3; ++k) {
        const fs::path p = dir / ("r" + std::to_string(k) + ".json");
        write_file(p, fake_eval_report(0.75, 8, "h"));
        files += " " + p.string();
    }
    CHECK(run_cli("report --out " + (dir / "box").string() + files, dir / "log.txt") == 0);
    std::ifstream in(dir / "box" / "accuracy_box.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(row == "8,0.75,0.75,0.75,0.75,0.75,3");

    const fs::path single = dir / "single.json";
    write_file(single, fake_eval_report(0.9, 2, "h"));
    CHECK(run_cli("report --out " + (dir / "one").string() + " " + single.string(),
                  dir / "log2.txt") == 0);
    std::ifstream in2(dir / "one" / "accuracy_box.csv");
    std::getline(in2, header);
    std::getline(in2, row);
    CHECK(row == "2,0.9,0.9,0.9,0.9,0.9,1");
}

TEST_CASE("mixed config hashes warn but do not fail") {
    const fs::path dir = fresh_dir("report_mixed");
    write_file(dir / "a.json", fake_eval_report(0.8, 4, "hash_a"));
    write_file(dir / "b.json", fake_eval_report(0.9, 4, "hash_b"));
    CHECK(run_cli("report --out " + (dir / "out").string() + " " + (dir / "a.json").string() +
                      " " + (dir / "b.json").string(),
                  dir / "log.txt") == 0);
    CHECK(read_file(dir / "log.txt").find("mixed config hashes") != std::string::npos);
}
