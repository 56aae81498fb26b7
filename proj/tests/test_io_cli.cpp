#include "cryomos/cli.hpp"
#include "cryomos/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cryomos;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cryomos_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& name = "") const {
        return name.empty() ? path.string() : (path / name).string();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << body;
}

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

const std::string fixtures = std::string(CRYOMOS_SOURCE_DIR) + "/data/fixtures";
const std::string params_file = std::string(CRYOMOS_SOURCE_DIR) + "/data/params/reference.params";

} // namespace

TEST_CASE("config parser: sections, comments, version, diagnostics") {
    std::istringstream good("# comment\nversion = 2\n[alpha]\nx = 1\ny = two words\n[beta]\nx = 3\n");
    const auto cfg = io::parse_config(good, "good.cfg");
    CHECK(cfg.version == "2");
    REQUIRE(cfg.sections.size() == 2);
    CHECK(cfg.section("alpha").get("y") == "two words");
    CHECK(cfg.section("beta").get_double("x") == 3.0);

    std::istringstream no_version("[alpha]\nx = 1\n");
    CHECK_THROWS_WITH_AS((void)io::parse_config(no_version, "f.cfg"),
                         doctest::Contains("missing top-level 'version'"), io::ParseError);

    std::istringstream stray("version = 1\nkey = 1\n");
    CHECK_THROWS_WITH_AS((void)io::parse_config(stray, "f.cfg"), doctest::Contains("f.cfg:2"),
                         io::ParseError);

    std::istringstream dup("version = 1\n[a]\nx = 1\nx = 2\n");
    CHECK_THROWS_WITH_AS((void)io::parse_config(dup, "f.cfg"), doctest::Contains("duplicate"),
                         io::ParseError);

    std::istringstream noeq("version = 1\n[a]\njust text\n");
    CHECK_THROWS_WITH_AS((void)io::parse_config(noeq, "f.cfg"), doctest::Contains("f.cfg:3"),
                         io::ParseError);
}

TEST_CASE("model parameter sections reject unknown and missing keys") {
    const auto lib = shipped_reference_library();
    std::ostringstream os;
    os << "version = 1\n";
    io::emit_model_section(os, "set", lib.at("CryoNMOS-ref"));

    {
        std::istringstream in(os.str());
        const auto cfg = io::parse_config(in);
        const auto p = io::model_params_from_section(cfg.section("set"));
        CHECK(p.vth0 == lib.at("CryoNMOS-ref").vth0);
    }
    {
        std::istringstream in(os.str() + "bogus_key = 7\n");
        const auto cfg = io::parse_config(in);
        CHECK_THROWS_WITH_AS((void)io::model_params_from_section(cfg.section("set")),
                             doctest::Contains("unknown key 'bogus_key'"), io::ParseError);
    }
    {
        std::string body = os.str();
        body.erase(body.find("n0 = "), body.find("\nss_floor") - body.find("n0 = "));
        std::istringstream in(body);
        const auto cfg = io::parse_config(in);
        CHECK_THROWS_WITH_AS((void)io::model_params_from_section(cfg.section("set")),
                             doctest::Contains("missing required key 'n0'"), io::ParseError);
    }
}

TEST_CASE("parameter emission is a byte-stable fixed point of parsing") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p;
        p.vth0 = 0.05 + 0.4 * u(rng);
        p.c_vth = 1e-5 + 1e-3 * u(rng);
        p.mu0 = 20.0 + 300.0 * u(rng);
        p.alpha_ph = 0.5 + 2.0 * u(rng);
        p.mu_coulomb = 100.0 + 900.0 * u(rng);
        p.n0 = 1.0 + u(rng);
        p.ss_floor = 30.0 * u(rng);
        p.v_sat = 1e7 * (0.5 + 10.0 * u(rng));
        p.lambda_clm = 0.3 * u(rng);
        p.ioff_ref = std::pow(10.0, -12.0 + 3.0 * u(rng));
        p.eta = 40.0 + 200.0 * u(rng);

        std::ostringstream first;
        first << "version = 1\n";
        io::emit_model_section(first, "s", p);
        std::istringstream in(first.str());
        const auto p2 = io::model_params_from_section(io::parse_config(in).section("s"));
        std::ostringstream second;
        second << "version = 1\n";
        io::emit_model_section(second, "s", p2);
        CHECK(first.str() == second.str());
        CHECK(p2.vth0 == doctest::Approx(p.vth0).epsilon(1e-8));
        CHECK(p2.ioff_ref == doctest::Approx(p.ioff_ref).epsilon(1e-8));
    }
}

TEST_CASE("the shipped parameter file re-ingests losslessly") {
    const auto sets = io::load_model_sections(params_file);
    CHECK(sets.size() == 6);
    const auto lib = shipped_reference_library();
    for (const auto& [name, p] : sets) {
        CHECK(p.vth0 == lib.at(name).vth0);
        CHECK(p.eta == lib.at(name).eta);
    }
    const auto cfg = io::parse_config_file(params_file);
    const auto stack = io::stack_from_section(cfg.section("default-stack"));
    CHECK(stack.doping.n_dop == 1e18);
}

TEST_CASE("sweep CSV round-trips and normalizes PMOS data on ingestion") {
    const auto lib = shipped_reference_library();
    const auto sweep = iv_sweep_synthesize(lib.at("CryoNMOS-ref"), reference_geometry(), 0.05,
                                           77.0, linspace(-0.2, 0.9, 45));
    std::ostringstream first;
    io::emit_sweep_csv(first, sweep);
    std::istringstream in(first.str());
    const auto parsed = io::parse_sweep_csv(in, "mem");
    std::ostringstream second;
    io::emit_sweep_csv(second, parsed);
    CHECK(first.str() == second.str());

    // Negative-convention PMOS data ingests as ascending magnitudes.
    std::string pmos_csv =
        "# vds_V=-0.05\n# T_K=77\n# W_um=0.1\n# L_um=0.03\n# cox_F_cm2=1.85e-06\n"
        "# polarity=pmos\nvgs_V,ids_A\n";
    for (int i = 0; i < 12; ++i) {
        pmos_csv += "-" + io::format_double(0.05 + 0.05 * i) + ",-" +
                    io::format_double(1e-9 * std::pow(10.0, i * 0.4)) + "\n";
    }
    std::istringstream pin(pmos_csv);
    const auto psweep = io::parse_sweep_csv(pin, "pmos.csv");
    CHECK(psweep.polarity == Polarity::pmos);
    CHECK(psweep.vds == 0.05);
    for (std::size_t i = 0; i < psweep.points.size(); ++i) {
        CHECK(psweep.points[i].ids > 0.0);
        if (i > 0) CHECK(psweep.points[i].vgs > psweep.points[i - 1].vgs);
    }
}

TEST_CASE("sweep CSV diagnostics carry file and line information") {
    std::istringstream missing_meta("# vds_V=0.05\nvgs_V,ids_A\n0,1e-9\n");
    CHECK_THROWS_WITH_AS((void)io::parse_sweep_csv(missing_meta, "s.csv"),
                         doctest::Contains("missing metadata"), io::ParseError);

    std::istringstream bad_row(
        "# vds_V=0.05\n# T_K=77\n# W_um=0.1\n# L_um=0.03\n# cox_F_cm2=1.8e-06\n"
        "# polarity=nmos\nvgs_V,ids_A\n0,1e-9\n0.1,not_a_number\n");
    CHECK_THROWS_WITH_AS((void)io::parse_sweep_csv(bad_row, "s.csv"), doctest::Contains("s.csv:9"),
                         io::ParseError);

    std::istringstream empty("");
    CHECK_THROWS_WITH_AS((void)io::parse_sweep_csv(empty, "s.csv"), doctest::Contains("s.csv:1"),
                         io::ParseError);
}

TEST_CASE("cli: transfer family emits the requested grid") {
    const auto r = run({"model", "--T", "77", "--vds", "0.05", "--vgs", "0:0.9:0.01"});
    CHECK(r.exit_code == cli::exit_ok);
    // 6 metadata lines + header + 91 data rows
    int rows = 0;
    std::istringstream in(r.out);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line != "vgs_V,ids_A") ++rows;
    CHECK(rows == 91);

    const auto again = run({"model", "--T", "77", "--vds", "0.05", "--vgs", "0:0.9:0.01"});
    CHECK(again.out == r.out); // deterministic emission
}

TEST_CASE("cli: temperatures below the physics floor exit with a parse/domain failure") {
    const auto r = run({"model", "--T", "2", "--vds", "0.05", "--vgs", "0:0.9:0.01"});
    CHECK(r.exit_code == cli::exit_io);
    CHECK(r.err.find("temperature") != std::string::npos);
}

TEST_CASE("cli: output-family curves include every requested gate voltage") {
    const auto r = run({"model", "--T", "77", "--mode", "output", "--vds", "0:0.9:0.05",
                        "--vgs", "0.3,0.6,0.9"});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(r.out.find("vds_V,ids_A_vgs0.3,ids_A_vgs0.6,ids_A_vgs0.9") != std::string::npos);
}

TEST_CASE("cli: golden sweep reproduces the committed golden report byte for byte") {
    TempDir tmp("golden");
    const auto r = run({"extract", fixtures + "/golden_sweep.csv", "--out", tmp.str()});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(read_file(tmp.str("golden_sweep.report")) ==
          read_file(fixtures + "/golden_sweep.report"));
}

TEST_CASE("cli: empty sweep file fails with a diagnostic and exit 1") {
    TempDir tmp("empty");
    write_file(tmp.str("empty.csv"), "");
    const auto r = run({"extract", tmp.str("empty.csv")});
    CHECK(r.exit_code == cli::exit_io);
    CHECK(r.err.find("empty.csv:1") != std::string::npos);
}

TEST_CASE("cli: a directory of sweeps yields one row per file, sorted by filename") {
    TempDir tmp("dir");
    const auto lib = shipped_reference_library();
    const auto grid = linspace(-0.35, 0.9, 126);
    int idx = 0;
    for (double t : {298.0, 77.0, 150.0}) {
        const auto sweep =
            iv_sweep_synthesize(lib.at("CryoNMOS-ref"), reference_geometry(), 0.9, t, grid);
        std::ofstream f(tmp.str("sweep_" + std::to_string(idx++) + ".csv"));
        io::emit_sweep_csv(f, sweep);
    }
    TempDir out("dir_out");
    // ratio 100 is reachable at all three temperatures; the 1e7 default
    // is unreachable at 298 K and would legitimately mark that report
    // partial (exercised separately below).
    const auto r = run({"extract", tmp.str(), "--ratio", "100", "--out", out.str()});
    CHECK(r.exit_code == cli::exit_ok);
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> names;
    std::getline(in, line); // header
    while (std::getline(in, line))
        if (!line.empty()) names.push_back(line.substr(0, line.find(',')));
    REQUIRE(names.size() == 3);
    CHECK(names[0] == "sweep_0.csv");
    CHECK(names[1] == "sweep_1.csv");
    CHECK(names[2] == "sweep_2.csv");
}

TEST_CASE("cli: an unreachable ratio target yields a partial report and exit 2") {
    TempDir tmp("partial");
    const auto lib = shipped_reference_library();
    const auto sweep = iv_sweep_synthesize(lib.at("CryoNMOS-ref"), reference_geometry(), 0.9,
                                           298.0, linspace(-0.35, 0.9, 126));
    std::ofstream f(tmp.str("warm.csv"));
    io::emit_sweep_csv(f, sweep);
    f.close();
    TempDir out("partial_out");
    const auto r = run({"extract", tmp.str("warm.csv"), "--out", out.str()});
    CHECK(r.exit_code == cli::exit_partial);
    CHECK(r.err.find("vov_at_ratio") != std::string::npos);
    CHECK(read_file(out.str("warm.report")).find("status = partial") != std::string::npos);
}

TEST_CASE("cli: fit round-trips a synthetic corpus and honors threshold and seed") {
    TempDir tmp("fit");
    const auto lib = shipped_reference_library();
    auto truth = lib.at("CryoNMOS-ref");

    const auto grid = linspace(-0.3, 0.9, 61);
    std::string sweep_list;
    int idx = 0;
    for (double t : {77.0, 150.0, 298.0}) {
        for (double vds : {0.05, 0.9}) {
            const auto sweep = iv_sweep_synthesize(truth, reference_geometry(), vds, t, grid);
            const std::string name = "s" + std::to_string(idx++) + ".csv";
            std::ofstream f(tmp.str(name));
            io::emit_sweep_csv(f, sweep);
            sweep_list += (sweep_list.empty() ? "" : ";") + name;
        }
    }
    // Perturbed initial guess written alongside.
    auto init = truth;
    init.vth0 *= 1.2;
    init.mu0 *= 0.8;
    {
        std::ofstream f(tmp.str("init.params"));
        f << "version = 1\n";
        io::emit_model_section(f, "init", init);
    }
    write_file(tmp.str("fit.cfg"),
               "version = 1\n[fit]\ninitial_params = init.params\nsweeps = " + sweep_list +
                   "\nfree = vth0;mu0\nrestarts = 2\nmax_iterations = 1200\n[bounds]\n"
                   "vth0 = 0.02;0.4\nmu0 = 10;300\n");

    TempDir out1("fit_out1");
    const auto r1 = run({"fit", "--config", tmp.str("fit.cfg"), "--out", out1.str()});
    CHECK(r1.exit_code == cli::exit_ok);
    const auto fitted = io::load_model_sections(out1.str("fit_result.params"));
    REQUIRE(fitted.size() == 1);
    CHECK(fitted[0].second.vth0 / truth.vth0 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fitted[0].second.mu0 / truth.mu0 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(read_file(out1.str("fit_errors.csv")).find("T_K,vds_V") == 0);

    // threshold 0 can only pass on an exact fit
    TempDir out2("fit_out2");
    const auto r2 =
        run({"fit", "--config", tmp.str("fit.cfg"), "--threshold", "0", "--out", out2.str()});
    CHECK(r2.exit_code == cli::exit_unconverged);

    // seeded determinism: identical bytes on a rerun
    TempDir out3("fit_out3");
    const auto r3 = run({"fit", "--config", tmp.str("fit.cfg"), "--out", out3.str()});
    CHECK(r3.exit_code == cli::exit_ok);
    CHECK(read_file(out1.str("fit_result.params")) == read_file(out3.str("fit_result.params")));
    CHECK(r1.out == r3.out);
}

TEST_CASE("cli: model output re-ingested by extract reproduces the set's anchors") {
    TempDir tmp("pipeline");
    const auto sat = run({"model", "--set", "CryoNMOS-ref", "--T", "77", "--vds", "0.9", "--vgs",
                          "-0.35:0.9:0.005"});
    REQUIRE(sat.exit_code == cli::exit_ok);
    write_file(tmp.str("sat.csv"), sat.out);
    TempDir out("pipeline_out");
    const auto r = run({"extract", tmp.str("sat.csv"), "--out", out.str()});
    CHECK(r.exit_code == cli::exit_ok);
    std::istringstream in(read_file(out.str("sat.report")));
    const auto report = io::parse_report(in, "sat.report");
    REQUIRE(report.vth_cc.has_value());
    CHECK(std::abs(*report.vth_cc - 0.109) < 0.015);
    REQUIRE(report.ss_min.has_value());
    CHECK(std::abs(*report.ss_min - ss_of_T(shipped_reference_library().at("CryoNMOS-ref"), 77.0)) <
          1.0);
}

TEST_CASE("cli: bench reports every anchor as PASS with the shipped library") {
    const auto r = run({"bench"});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(r.out.find("technology,V_DD_V,T_K,f_RO_Hz,dff_delay_s,power_W,status") !=
          std::string::npos);
    CHECK(r.out.find("fails-to-oscillate") != std::string::npos); // RVT at 0.6 V / 77 K
    CHECK(r.out.find("FAIL") == std::string::npos);
    int passes = 0;
    std::istringstream in(r.out);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("PASS ", 0) == 0) ++passes;
    CHECK(passes == 8);
}

TEST_CASE("cli: bench on the shipped config file") {
    const auto cfg = std::string(CRYOMOS_SOURCE_DIR) + "/data/bench/default_bench.cfg";
    const auto r = run({"bench", "--config", cfg});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: bench --json carries the same values as the CSV table") {
    const auto csv = run({"bench"});
    const auto js = run({"bench", "--json"});
    CHECK(js.exit_code == cli::exit_ok);
    const auto j = nlohmann::json::parse(js.out);

    std::map<std::string, std::vector<double>> csv_rows;
    std::istringstream in(csv.out);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.rfind("PASS", 0) == 0 || line.rfind("FAIL", 0) == 0 || line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        const std::string key = cells[0] + "/" + cells[1] + "/" + cells[2];
        csv_rows[key] = {std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5])};
    }
    REQUIRE(j.at("table").size() == csv_rows.size());
    for (const auto& row : j.at("table")) {
        const std::string key = row.at("technology").get<std::string>() + "/" +
                                io::format_double(row.at("V_DD_V").get<double>()) + "/" +
                                io::format_double(row.at("T_K").get<double>());
        REQUIRE(csv_rows.count(key) == 1);
        CHECK(row.at("f_RO_Hz").get<double>() == csv_rows[key][0]);
        CHECK(row.at("dff_delay_s").get<double>() == csv_rows[key][1]);
        CHECK(row.at("power_W").get<double>() == csv_rows[key][2]);
    }
}

TEST_CASE("cli: bench fails loudly when a reference set is missing") {
    TempDir tmp("bench_missing");
    const auto lib = shipped_reference_library();
    std::ofstream f(tmp.str("partial.params"));
    f << "version = 1\n";
    for (const auto& name : reference_set_names())
        if (name != "RVT-NMOS-ref") io::emit_model_section(f, name, lib.at(name));
    f.close();
    const auto r = run({"bench", "--params", tmp.str("partial.params")});
    CHECK(r.exit_code == cli::exit_io);
    CHECK(r.err.find("RVT-NMOS-ref") != std::string::npos);
}

TEST_CASE("cli: physics emits the freeze-out curve with the documented columns") {
    const auto r = run({"physics", "--tmin", "10", "--tmax", "298", "--n", "30"});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(r.out.rfind("T_K,VTH_V,dVTH_V", 0) == 0);
    int rows = 0;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    double prev_dvth = 1e9;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        const auto second_comma = line.find(',', line.find(',') + 1);
        const double dvth = std::stod(line.substr(second_comma + 1));
        CHECK(dvth <= prev_dvth + 1e-12);
        prev_dvth = dvth;
    }
    CHECK(rows == 30);

    const auto bad = run({"physics", "--tmin", "2", "--tmax", "298", "--n", "5"});
    CHECK(bad.exit_code == cli::exit_io);
}

TEST_CASE("cli: physics reads stack sections from parameter files") {
    const auto r = run({"physics", "--params", params_file, "--set", "default-stack", "--tmin",
                        "77", "--tmax", "298", "--n", "4"});
    CHECK(r.exit_code == cli::exit_ok);
    CHECK(r.out.rfind("T_K,VTH_V,dVTH_V", 0) == 0);
}
