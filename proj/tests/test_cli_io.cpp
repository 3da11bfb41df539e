#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "cli_io.hpp"

using namespace nigmix;
using namespace nigmix::cli;

TEST(NumberText, RoundTrips) {
    for (double x : {0.0, -1.5, 1e-300, 3.141592653589793, 1.0 / 3.0, 6.02e23}) {
        EXPECT_EQ(parse_double(format_double(x), "test"), x);
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_TRUE(std::isnan(parse_double("nan", "test")));
    EXPECT_THROW(parse_double("1.5x", "test"), ValidationError);
}

TEST(Csv, QuotingAndSplitting) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(split_csv_line("1,\"a,b\",\"x\"\"y\""), (std::vector<std::string>{"1", "a,b", "x\"y"}));
}

TEST(Csv, MatrixAndLabelsRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "nigmix_cli_io_test";
    std::filesystem::remove_all(dir);
    Matrix x(3, 2);
    x << 0.1, -2.0, 1e-7, 3.0, 5.5, 1.0 / 3.0;
    write_text(dir / "m.csv", matrix_csv(x));
    EXPECT_EQ(read_matrix_csv(dir / "m.csv"), x);
    const std::vector<int> labels{2, 0, 1};
    write_text(dir / "l.csv", labels_csv(labels));
    EXPECT_EQ(read_labels_csv(dir / "l.csv"), labels);
    EXPECT_EQ(matrix_csv(x).substr(0, 7), "x1,x2\r\n");
    std::filesystem::remove_all(dir);
}

TEST(Manifest, RoundTripsLosslessly) {
    RunManifest m;
    m.command = "fit";
    PriorConfig p;
    p.xi = 0.25;
    p.nu_tau = 4.5;
    p.lambda_prior_family = LambdaPrior::gamma;
    m.prior = p;
    FitConfig f;
    f.variant = Variant::trun;
    f.concentration = Concentration::dpm;
    f.m0 = 17;
    f.seed = 99;
    m.fit = f;
    GenConfig g;
    g.population = Population::nonuniform;
    g.lambda_star = 0.1;
    m.gen = g;
    m.seeds = {1, 2, 3};
    m.inputs = {"data.csv"};
    m.outputs = {"result.json", "runs.csv"};
    m.extra = json{{"restarts", 3}};
    const json j = manifest_to_json(m);
    const RunManifest back = manifest_from_json(json::parse(j.dump()));
    EXPECT_EQ(manifest_to_json(back), j);
    EXPECT_EQ(back.prior->xi, 0.25);
    EXPECT_EQ(*back.prior->nu_tau, 4.5);
    EXPECT_EQ(back.fit->variant, Variant::trun);
    EXPECT_EQ(back.fit->m0, 17u);
    EXPECT_EQ(back.gen->population, Population::nonuniform);
}

TEST(Manifest, RejectsMalformedJson) {
    const auto dir = std::filesystem::temp_directory_path() / "nigmix_cli_io_json";
    write_text(dir / "bad.json", "{not json");
    EXPECT_THROW(read_json(dir / "bad.json"), ValidationError);
    std::filesystem::remove_all(dir);
    EXPECT_THROW(read_json(dir / "missing.json"), IoError);
}
