#include <doctest.h>

#include "hhmmo/config.hpp"
#include "hhmmo/table.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hhmmo;
using hhmmo::testing::error_kind_of;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("key-value parsing") {
    const KeyValues kv = parse_key_values("# comment\nmodel.gbar_k = 0.3\n\n  run.regime=n_slow  # trailing\n");
    CHECK(kv.size() == 2);
    CHECK(kv.at("model.gbar_k") == "0.3");
    CHECK(kv.at("run.regime") == "n_slow");
    CHECK(error_kind_of([] { parse_key_values("model.gbar_k 0.3\n"); }) == ErrorKind::ConfigError);
    CHECK(error_kind_of([] { parse_key_values("a = 1\na = 2\n"); }) == ErrorKind::ConfigError);
    CHECK(error_kind_of([] { parse_key_values("a =\n"); }) == ErrorKind::ConfigError);
    CHECK(error_kind_of([] { read_key_values("/nonexistent/dir/run.cfg"); }) == ErrorKind::ConfigError);
}

TEST_CASE("defaults") {
    const RunConfig c = build_config({});
    CHECK(c.regime == Regime::h_slow);
    CHECK(c.model.delta_h == 0.025);
    CHECK(c.model.delta_n == 1.0);
    CHECK(c.model.gamma == doctest::Approx(1.0 / 12.0));
    CHECK(c.simulation.system == SystemKind::full4d);
    CHECK_FALSE(c.duration.has_value());
    CHECK(c.sweep.step == 0.25);
    CHECK(c.output_dir == ".");
    const RunConfig n = build_config({{"run.regime", "n_slow"}});
    CHECK(n.model.delta_h == 1.0);
    CHECK(n.model.delta_n == 0.01);
}

TEST_CASE("physical and dimensionless current keys") {
    const RunConfig phys = build_config({{"model.current", "26.49"}});
    CHECK(phys.model.Ibar == doctest::Approx(rescale_current(26.49)).epsilon(1e-15));
    CHECK_FALSE(phys.notes.empty());
    const RunConfig dimless = build_config({{"model.ibar", "0.002"}});
    CHECK(dimless.model.Ibar == 0.002);
    CHECK(dimless.notes.empty());
    CHECK(error_kind_of([] { build_config({{"model.current", "20"}, {"model.ibar", "0.001"}}); }) ==
          ErrorKind::ConfigError);
}

TEST_CASE("invalid configurations are rejected") {
    const std::vector<KeyValues> bad = {
        {{"model.unknown", "1"}},
        {{"sweep.i_min", "abc"}},
        {{"model.gbar_k", "-0.3"}},
        {{"model.e_k", "0.6"}},
        {{"run.regime", "m_slow"}},
        {{"integrator.system", "euler"}},
        {{"integrator.rel_tol", "0"}},
        {{"sweep.i_min", "40"}, {"sweep.i_max", "30"}},
        {{"sweep.workers", "1.5"}},
        {{"geometry.grid_points", "1"}},
        {{"simulate.duration", "-1"}},
    };
    for (const KeyValues& kv : bad) {
        INFO(kv.begin()->first << " = " << kv.begin()->second);
        CHECK(error_kind_of([&] { build_config(kv); }) == ErrorKind::ConfigError);
    }
}

TEST_CASE("every known key is accepted") {
    const auto keys = known_config_keys();
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(std::find(keys.begin(), keys.end(), "model.gbar_k") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "sweep.workers") != keys.end());
    const RunConfig c = build_config(parse_key_values(
        "run.regime = n_slow\nintegrator.system = reduced3d\nintegrator.rel_tol = 1e-9\n"
        "classifier.slow_rate_fraction = 0.2\nclassifier.v_split = -0.4\nsweep.workers = 3\n"
        "simulate.duration = 500\nlocal.epsilon = 0.05\noutput.dir = out\nmodel.gamma = 0.05\n"));
    CHECK(c.regime == Regime::n_slow);
    CHECK(c.simulation.system == SystemKind::reduced3d);
    CHECK(c.simulation.rel_tol == 1e-9);
    CHECK(c.simulation.classifier.slow_rate_fraction == 0.2);
    REQUIRE(c.simulation.classifier.v_split.has_value());
    CHECK(*c.simulation.classifier.v_split == -0.4);
    CHECK(c.sweep.workers == 3);
    CHECK(c.duration == 500.0);
    CHECK(c.local_epsilon == 0.05);
    CHECK(c.output_dir == "out");
    CHECK(c.model.gamma == 0.05);
}

TEST_CASE("model parameters round-trip through the config text") {
    ModelParameters p = regime_defaults(Regime::n_slow);
    p.Ibar = rescale_current(64.5, p);
    p.gbar_L = 0.003;
    const RunConfig c = build_config(parse_key_values(model_to_config(p)));
    CHECK(c.model.Ibar == p.Ibar);
    CHECK(c.model.gbar_L == p.gbar_L);
    CHECK(c.model.delta_n == p.delta_n);
    CHECK(c.model.gamma == p.gamma);
    CHECK(c.model.tau_n == p.tau_n);
}

TEST_CASE("table writer") {
    const fs::path dir = fs::temp_directory_path() / "hhmmo_table_test";
    fs::create_directories(dir);
    const fs::path file = dir / "t.csv";
    {
        TableWriter w(file.string(), "demo", 2, {"name", "value", "count"});
        w.row({std::string("a"), 0.1, int64_t{3}});
        w.row({std::string("b"), std::numeric_limits<double>::quiet_NaN(), int64_t{-1}});
        CHECK_THROWS(w.row({1.0}));
        w.close();
    }
    CHECK(slurp(file) == "# demo v2\nname,value,count\na,0.10000000000000001,3\nb,nan,-1\n");
    CHECK(format_cell(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_cell(std::numeric_limits<double>::infinity()) == "inf");
    fs::remove_all(dir);
}
