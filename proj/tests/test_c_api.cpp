#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "srd/srd.h"

TEST_CASE("status names and version") {
    CHECK(std::string(srd_version()) == "1.0.0");
    CHECK(std::string(srd_status_name(SRD_OK)) == "ok");
    CHECK(std::string(srd_status_name(SRD_ERR_CONSTRAINT)) == "constraint-violation");
    CHECK(std::string(srd_status_name(SRD_ERR_PARSE)) == "parse-error");
}

TEST_CASE("derivations fill POD structs") {
    srd_growth_params g{};
    REQUIRE(srd_derive_growth(1.0, 3, 0.5, 0.5, 0.5, nullptr, &g) == SRD_OK);
    CHECK(g.a1 == doctest::Approx(1.0));
    CHECK(g.b1 == doctest::Approx(2.0));
    CHECK(g.b2 == doctest::Approx(6.0));

    srd_cone_params c{};
    CHECK(srd_derive_cone(1.0, 1, 1.0, 1.0, &c) == SRD_ERR_CONSTRAINT);
    CHECK(std::string(srd_last_error()).find("cone amplitude") != std::string::npos);
    REQUIRE(srd_derive_cone(1.0, 1, std::sqrt(0.5), 1.0, &c) == SRD_OK);
    CHECK(c.horizon > 0.0);
    CHECK(std::string(srd_last_error()).empty());

    double bound = 0.0;
    REQUIRE(srd_cone_amplitude_bound(1.0, 1, &bound) == SRD_OK);
    CHECK(bound == doctest::Approx(1.0));

    srd_decay_params d{};
    REQUIRE(srd_derive_decay(1.0, 4, 0.5, 1.0, &d) == SRD_OK);
    CHECK(d.a3 > 0.0);
    CHECK(srd_derive_decay(1.0, 4, 0.5, 1.0, nullptr) == SRD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("barrier handles evaluate the closed forms") {
    srd_barrier* h = nullptr;
    REQUIRE(srd_barrier_create_homogeneous(1.0, 0.5, &h) == SRD_OK);
    const char* family = nullptr;
    REQUIRE(srd_barrier_family(h, &family) == SRD_OK);
    CHECK(std::string(family) == "homogeneous");
    double v = 0.0, res = 1.0;
    REQUIRE(srd_barrier_eval(h, 0.0, 0.0, &v) == SRD_OK);
    CHECK(v == doctest::Approx(1.0));
    REQUIRE(srd_barrier_residual(h, 4.0, 0.25, &res) == SRD_OK);
    CHECK(std::abs(res) <= 1e-12);
    CHECK(srd_barrier_eval(h, 0.0, 0.75, &v) == SRD_ERR_DOMAIN);
    srd_barrier_free(h);

    srd_growth_params g{};
    REQUIRE(srd_derive_growth(1.0, 3, 0.5, 0.5, 0.5, nullptr, &g) == SRD_OK);
    srd_barrier* lower = nullptr;
    REQUIRE(srd_barrier_create_growth_lower(&g, &lower) == SRD_OK);
    double lap = 0.0, dt = 0.0;
    REQUIRE(srd_barrier_laplacian(lower, 1.0, 0.5, &lap) == SRD_OK);
    REQUIRE(srd_barrier_time_derivative(lower, 1.0, 0.5, &dt) == SRD_OK);
    REQUIRE(srd_barrier_residual(lower, 1.0, 0.5, &res) == SRD_OK);
    CHECK(res >= 0.0);
    srd_barrier_free(lower);
    srd_barrier_free(nullptr);
}

TEST_CASE("simulate through the C interface") {
    srd_barrier* h = nullptr;
    REQUIRE(srd_barrier_create_homogeneous(1.0, 0.5, &h) == SRD_OK);
    srd_boundary* bc = nullptr;
    REQUIRE(srd_boundary_create_neumann(&bc) == SRD_OK);

    srd_solver_config cfg;
    srd_solver_config_default(&cfg);
    CHECK(cfg.dt_init == 1e-3);
    cfg.t_end = 0.25;
    cfg.snapshot_every = 0.125;
    cfg.dt_init = 1e-4;
    const int cells = 16;
    std::vector<double> u0(cells + 1, 1.0);
    srd_trajectory* traj = nullptr;
    REQUIRE(srd_simulate(1.0, cells, 1, u0.data(), &cfg, bc, &traj) == SRD_OK);

    size_t count = 0, nodes = 0;
    REQUIRE(srd_trajectory_snapshot_count(traj, &count) == SRD_OK);
    REQUIRE(srd_trajectory_node_count(traj, &nodes) == SRD_OK);
    CHECK(count == 3);
    CHECK(nodes == cells + 1);
    std::vector<double> values(nodes);
    double t = 0.0;
    REQUIRE(srd_trajectory_snapshot(traj, count - 1, &t, values.data()) == SRD_OK);
    CHECK(t == doctest::Approx(0.25));
    // Spatially constant data follows the ODE solution sqrt(1 - 2t).
    for (double x : values) CHECK(x == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(srd_trajectory_snapshot(traj, count, &t, values.data()) == SRD_ERR_INVALID_ARGUMENT);

    int has = 1;
    REQUIRE(srd_trajectory_extinction(traj, &has, nullptr, nullptr) == SRD_OK);
    CHECK(has == 0);
    long steps = 0;
    REQUIRE(srd_trajectory_steps(traj, &steps) == SRD_OK);
    CHECK(steps > 0);

    const auto path = std::filesystem::temp_directory_path() / "srd-c-api-traj.csv";
    REQUIRE(srd_trajectory_write_csv(traj, path.string().c_str()) == SRD_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,r,u");
    std::filesystem::remove(path);
    CHECK(srd_trajectory_write_csv(traj, "/nonexistent-dir/x.csv") == SRD_ERR_IO);

    srd_trajectory_free(traj);
    srd_boundary_free(bc);
    srd_barrier_free(h);
}

TEST_CASE("simulate rejects invalid arguments") {
    srd_boundary* bc = nullptr;
    REQUIRE(srd_boundary_create_constant(1.0, &bc) == SRD_OK);
    srd_solver_config cfg;
    srd_solver_config_default(&cfg);
    std::vector<double> u0(5, 1.0);
    srd_trajectory* traj = nullptr;
    CHECK(srd_simulate(1.0, 4, 1, u0.data(), &cfg, bc, &traj) == SRD_ERR_CONSTRAINT);
    CHECK(srd_simulate(1.0, 4, 1, nullptr, &cfg, bc, &traj) == SRD_ERR_INVALID_ARGUMENT);
    cfg.scheme = static_cast<srd_scheme>(7);
    CHECK(srd_simulate(1.0, 4, 1, u0.data(), &cfg, bc, &traj) == SRD_ERR_INVALID_ARGUMENT);
    srd_boundary_free(bc);
}

TEST_CASE("batch runs report exit codes") {
    const auto dir = std::filesystem::temp_directory_path() / "srd-c-api-run";
    std::filesystem::remove_all(dir);
    const std::string out = dir.string();
    srd_run_options opt;
    srd_run_options_default(&opt);
    CHECK(opt.tolerance_scale == 1.0);
    CHECK(opt.record_timing == 1);
    opt.output_dir = out.c_str();
    opt.quiet = 1;
    int code = -1;
    REQUIRE(srd_run_config("command = homogeneous\n", &opt, &code) == SRD_OK);
    CHECK(code == 0);
    REQUIRE(srd_run_config("command = cone\n[cone]\namp = 1\n", &opt, &code) == SRD_OK);
    CHECK(code == 2);
    CHECK(std::string(srd_last_error()).find("cone amplitude") != std::string::npos);
    REQUIRE(srd_run_config("command = homogeneous\n[homogeneous]\ntolerance = 0\ndt = 0.01\n", &opt, &code) == SRD_OK);
    CHECK(code == 4);
    CHECK(srd_run_config(nullptr, &opt, &code) == SRD_ERR_INVALID_ARGUMENT);
    std::filesystem::remove_all(dir);
}
