#include "cli.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace proxfwi;
namespace fs = std::filesystem;

namespace {

struct Captured {
    int code = 0;
    std::string out;
};

Captured call(std::vector<std::string> args)
{
    args.insert(args.begin(), "proxfwi");
    std::ostringstream out;
    std::ostringstream err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = cli::run(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p);
    out << text;
}

/// Small model, data and config for invert runs.
struct InvertSetup {
    testutil::TempDir tmp;

    InvertSetup()
    {
        REQUIRE(call({"model-gen", "--shape", "square", "--nz", "21", "--nx", "21", "--dz", "50", "--dx", "50",
                      "--out", (tmp / "true.grd").string()})
                    .code == 0);
        REQUIRE(call({"model-gen", "--shape", "constant", "--nz", "21", "--nx", "21", "--dz", "50", "--dx", "50",
                      "--out", (tmp / "start.grd").string()})
                    .code == 0);
        REQUIRE(call({"forward", "--model", (tmp / "true.grd").string(), "--reference", (tmp / "start.grd").string(),
                      "--out", (tmp / "d.fdd").string(), "--frequencies", "3,5", "--sources", "3",
                      "--pml-cells", "8"})
                    .code == 0);
    }

    fs::path config(const std::string& name, const std::string& extra) const
    {
        const auto p = tmp / name;
        write_text(p, "data = d.fdd\nstart_model = start.grd\ntrue_model = true.grd\nfrequencies = 3,5\nsources = 3\npml_cells = 8\n"
                      "max_iter = 3\nlambda = 1e-9\n" +
                          extra);
        return p;
    }
};

} // namespace

TEST_CASE("sha256 test vectors")
{
    CHECK(cli::sha256_hex("abc", 3) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(cli::sha256_hex("", 0) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("PGM bytes")
{
    // 2x2 grid, [1000, 2000] -> [0, 255]
    const Eigen::VectorXd v = Eigen::Vector4d(1000.0, 1500.0, 2000.0, 3000.0);
    const std::string want = std::string("P5\n2 2\n255\n") + '\x00' + '\x80' + '\xff' + '\xff';
    CHECK(cli::pgm_bytes(v, 2, 2, 1000.0, 2000.0) == want);
    CHECK(cli::pgm_bytes(Eigen::Vector4d(500, 0, -1, 999), 2, 2, 1000.0, 2000.0).substr(11) == std::string(4, '\0'));

    const std::string gray = cli::pgm_bytes(Eigen::VectorXd::Constant(6, 1250.0), 2, 3, 1000.0, 2000.0);
    CHECK(gray.substr(0, 11) == "P5\n3 2\n255\n");
    CHECK(gray.substr(11) == std::string(6, static_cast<char>(64)));

    CHECK_THROWS_AS(cli::pgm_bytes(v, 2, 2, 2000.0, 2000.0), cli::UsageError);
    CHECK_THROWS_AS(cli::pgm_bytes(v, 3, 2, 0.0, 1.0), GeometryError);
}

TEST_CASE("denoiser specifications")
{
    CHECK(std::holds_alternative<denoisers::Identity>(cli::parse_denoiser("identity")));
    CHECK(std::get<denoisers::L1>(cli::parse_denoiser("l1:2.5")).weight == 2.5);
    const auto tv = std::get<denoisers::Tv>(cli::parse_denoiser("tv:0.5:30"));
    CHECK(tv.weight == 0.5);
    CHECK(tv.inner_iters == 30);
    const auto nl = std::get<denoisers::Nlm>(cli::parse_denoiser("nlm:2:0.1:1:4"));
    CHECK(nl.params.h == 2.0);
    CHECK(nl.params.search_radius == 4);
    CHECK(std::holds_alternative<denoisers::Custom>(cli::parse_denoiser("external:cp {in} {out}")));
    CHECK_THROWS_AS(cli::parse_denoiser("bm3d"), cli::UsageError);
    CHECK_THROWS_AS(cli::parse_denoiser("l1:abc"), cli::UsageError);
    CHECK_THROWS(cli::parse_denoiser("external:true"));
}

TEST_CASE("run configuration parsing")
{
    std::istringstream good("# comment\ndata = d.fdd\nstart_model = /abs/m.grd\nbatches = 3,5;5,7\n"
                            "denoiser = tv:1:100  # trailing\nrefine_data = true\nmu = 0.5\n");
    const auto cfg = cli::parse_run_config(good, "/base");
    CHECK(cfg.data == fs::path("/base/d.fdd"));
    CHECK(cfg.start_model == fs::path("/abs/m.grd"));
    CHECK(cfg.batches == std::vector<std::vector<double>>{{3, 5}, {5, 7}});
    CHECK(cfg.frequencies() == std::vector<double>{3, 5, 7});
    CHECK(cfg.denoiser == "tv:1:100");
    CHECK(cfg.refine_data);
    CHECK(*cfg.mu == 0.5);

    const auto rejects = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(cli::parse_run_config(in), cli::UsageError);
    };
    rejects("start_model = m.grd\n");
    rejects("data = d\nstart_model = m\ndata = e\n");
    rejects("data = d\nstart_model = m\ncolour = blue\n");
    rejects("data = d\nstart_model = m\nmax_iter = ten\n");
    rejects("data = d\nstart_model = m\nstopping = data-residual\n");
    rejects("data = d\nstart_model = m\nstopping = model-error\n");
    rejects("data = d\nstart_model = m\njust a line\n");
    CHECK_THROWS_AS(cli::load_run_config("/nonexistent/run.cfg"), FormatError);
}

TEST_CASE("manifest round trip")
{
    testutil::TempDir tmp;
    write_text(tmp / "in.txt", "abc");
    cli::Manifest m("demo");
    m.set("alpha", "1");
    m.input("file", tmp / "in.txt");
    m.write(tmp / "manifest.txt");
    const auto back = cli::read_manifest(tmp / "manifest.txt");
    CHECK(back == m.entries());
    CHECK(back.back().second == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_FALSE(fs::exists(tmp / "manifest.txt.tmp"));
    CHECK_THROWS(m.set("bad=key", "x"));
}

TEST_CASE("exit codes")
{
    testutil::TempDir tmp;
    CHECK(call({}).code == cli::usage);
    CHECK(call({"frobnicate"}).code == cli::usage);
    CHECK(call({"metrics", "--model", (tmp / "missing.grd").string(), "--truth", (tmp / "x.grd").string()}).code ==
          cli::data);
    REQUIRE(call({"model-gen", "--shape", "constant", "--nz", "8", "--nx", "8", "--out", (tmp / "c.grd").string()})
                .code == cli::ok);
    CHECK(call({"preview", "--in", (tmp / "c.grd").string(), "--out", (tmp / "c.pgm").string(), "--vmin", "3000",
                "--vmax", "1000"})
              .code == cli::usage);
    CHECK(call({"denoise", "--in", (tmp / "c.grd").string(), "--out", (tmp / "d.grd").string(), "--denoiser",
                "nlm:1:0:5:6"})
              .code == cli::data);
    CHECK(call({"model-gen", "--shape", "hexagon", "--out", (tmp / "h.grd").string()}).code == cli::usage);
    write_text(tmp / "bad.cfg", "data = nothing.fdd\nstart_model = c.grd\nfrequencies = 3\n");
    CHECK(call({"invert", "--config", (tmp / "bad.cfg").string()}).code == cli::data);
    write_text(tmp / "junk.grd", "GRD1 but not really");
    CHECK(call({"preview", "--in", (tmp / "junk.grd").string(), "--out", (tmp / "j.pgm").string(), "--vmin", "0",
                "--vmax", "1"})
              .code == cli::data);
}

TEST_CASE("denoise identity, metrics and preview")
{
    testutil::TempDir tmp;
    REQUIRE(call({"model-gen", "--shape", "disk", "--nz", "15", "--nx", "17", "--out", (tmp / "m.grd").string()})
                .code == 0);
    CHECK(fs::exists(tmp / "m.grd.manifest"));
    REQUIRE(call({"denoise", "--in", (tmp / "m.grd").string(), "--out", (tmp / "id.grd").string(), "--denoiser",
                  "identity"})
                .code == 0);
    CHECK(slurp(tmp / "id.grd") == slurp(tmp / "m.grd"));

    const auto metrics = call({"metrics", "--model", (tmp / "id.grd").string(), "--truth", (tmp / "m.grd").string()});
    CHECK(metrics.code == 0);
    CHECK(metrics.out == "rmse=0\n");

    REQUIRE(call({"preview", "--in", (tmp / "m.grd").string(), "--out", (tmp / "m.pgm").string(), "--vmin", "2000",
                  "--vmax", "2500"})
                .code == 0);
    const auto pgm = slurp(tmp / "m.pgm");
    CHECK(pgm.size() == std::string("P5\n17 15\n255\n").size() + 15 * 17);
    CHECK(pgm.substr(0, 13) == "P5\n17 15\n255\n");
}

TEST_CASE("forward noise is seeded")
{
    testutil::TempDir tmp;
    REQUIRE(call({"model-gen", "--shape", "cross", "--nz", "21", "--nx", "21", "--out", (tmp / "m.grd").string()})
                .code == 0);
    for (const std::string tag : {"a", "b"}) {
        const auto r = call({"forward", "--model", (tmp / "m.grd").string(), "--out", (tmp / (tag + ".fdd")).string(),
                             "--noise-out", (tmp / (tag + ".noise")).string(), "--frequencies", "4,6",
                             "--sources", "3", "--snr-db", "5", "--seed", "42"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("snr_db=5") != std::string::npos);
    }
    CHECK(cli::sha256_file(tmp / "a.fdd") == cli::sha256_file(tmp / "b.fdd"));
    CHECK(cli::sha256_file(tmp / "a.noise") == cli::sha256_file(tmp / "b.noise"));
    const auto snr = call({"metrics", "--data", (tmp / "a.fdd").string(), "--noise", (tmp / "a.noise").string()});
    CHECK(snr.code == 0);
}

TEST_CASE("invert is reproducible and the external pipe matches the built-in prox")
{
    InvertSetup s;
    const auto builtin = s.config("builtin.cfg", "denoiser = l1:1\n");
    REQUIRE(call({"invert", "--config", builtin.string(), "--output-dir", (s.tmp / "run1").string()}).code == 0);
    REQUIRE(call({"invert", "--config", builtin.string(), "--output-dir", (s.tmp / "run2").string()}).code == 0);
    const auto h1 = cli::sha256_file(s.tmp / "run1" / "model.grd");
    CHECK(h1 == cli::sha256_file(s.tmp / "run2" / "model.grd"));

    // the manifest records the output hash
    bool found = false;
    for (const auto& [k, v] : cli::read_manifest(s.tmp / "run1" / "manifest.txt")) {
        if (v == h1) {
            found = true;
        }
    }
    CHECK(found);

    const std::string exe = PROXFWI_EXE;
    const auto external = s.config("external.cfg", "denoiser = external:" + exe +
                                                       " denoise --in {in} --out {out} --denoiser l1:1 --scale {scale}\n");
    REQUIRE(call({"invert", "--config", external.string(), "--output-dir", (s.tmp / "ext").string()}).code == 0);
    CHECK(cli::sha256_file(s.tmp / "ext" / "model.grd") == h1);

    // a failing child aborts the run
    const auto failing = s.config("fail.cfg", "denoiser = external:" + exe + " denoise --in {in} --out {out} "
                                                                            "--denoiser nonsense\n");
    CHECK(call({"invert", "--config", failing.string(), "--output-dir", (s.tmp / "fail").string()}).code == cli::data);
}
