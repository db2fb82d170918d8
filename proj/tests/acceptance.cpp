// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Plain main so it runs without the doctest runner.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "lesionseg/enhance.hpp"
#include "lesionseg/kernels.hpp"
#include "lesionseg/metrics.hpp"
#include "lesionseg/pipeline.hpp"
#include "lesionseg/postprocess.hpp"
#include "lesionseg/raw_io.hpp"
#include "lesionseg/reference.hpp"
#include "lesionseg/unet.hpp"
#include "lesionseg/weights.hpp"
#include "mutations.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lesionseg;
namespace fs = std::filesystem;

namespace {

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what)
{
    if (!ok)
        throw Failed(what);
}

int failures = 0;

// `body` returns a short detail string on success and throws on failure.
void criterion(const char* name, double budget_s, const std::function<std::string()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && budget_s > 0 && s > budget_s) {
        ok = false;
        detail = "took " + std::to_string(s) + " s, budget " + std::to_string(budget_s) + " s";
    }
    if (!ok)
        ++failures;
    std::printf("%s  %-28s %7.3f s  %s\n", ok ? "PASS" : "FAIL", name, s, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

BinaryMask from_bits(unsigned bits)
{
    BinaryMask m(2, 2);
    for (int i = 0; i < 4; ++i)
        m.data()[i] = (bits >> i) & 1u;
    return m;
}

std::string metric_formulas()
{
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = 0; b < 16; ++b) {
            std::size_t inter = 0, uni = 0, na = 0, nb = 0;
            for (int i = 0; i < 4; ++i) {
                const bool x = (a >> i) & 1u, y = (b >> i) & 1u;
                inter += x && y;
                uni += x || y;
                na += x;
                nb += y;
            }
            const double d = na + nb == 0 ? 1.0 : 2.0 * inter / double(na + nb);
            const double j = uni == 0 ? 1.0 : inter / double(uni);
            expect(dice(from_bits(a), from_bits(b)) == d, "dice mismatch on 2x2 pair");
            expect(jaccard(from_bits(a), from_bits(b)) == j, "jaccard mismatch on 2x2 pair");
        }
    std::mt19937 rng(101);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const BinaryMask x = testing::random_mask(rng, 32, 32, 0.05 + 0.009 * i);
        const BinaryMask y = testing::random_blobs(rng, 32, 32);
        const double d = dice(x, y);
        worst = std::max(worst, std::abs(jaccard(x, y) - d / (2 - d)));
    }
    expect(worst <= 1e-12, "J = D/(2-D) off by " + fmt("%.3g", worst));
    return "256 2x2 pairs exact; J=D/(2-D) max err " + fmt("%.2g", worst);
}

std::string thresholded()
{
    expect(thresholded_jaccard(0.64) == 0.0, "0.64");
    expect(thresholded_jaccard(0.66) == 0.66, "0.66");
    expect(thresholded_jaccard(0.756) == 0.756, "0.756");
    expect(thresholded_jaccard(0.65) == 0.65, "0.65 boundary");
    return "0.64->0, 0.65->0.65, 0.66->0.66, 0.756->0.756";
}

std::string morphology()
{
    std::mt19937 rng(202);
    for (int i = 0; i < 100; ++i) {
        const BinaryMask m = i % 2 ? testing::random_blobs(rng, 64, 64) : testing::random_mask(rng, 64, 64, 0.6);
        expect(erode(m, 5) == reference::erode(m, 5), "erode");
        expect(dilate(m, 5) == reference::dilate(m, 5), "dilate");
        const BinaryMask o = open(m, 5), c = close(m, 5);
        expect(o == reference::dilate(reference::erode(m, 5), 5), "open");
        expect(c == reference::close(m, 5), "close");
        expect(testing::subset(o, m), "opening not anti-extensive");
        expect(testing::subset(m, c), "closing not extensive");
        expect(open(o, 5) == o, "opening not idempotent");
        expect(close(c, 5) == c, "closing not idempotent");
    }
    return "100 masks 64x64, se 5";
}

std::string largest()
{
    std::mt19937 rng(303);
    int nonempty = 0;
    for (int i = 0; i < 100; ++i) {
        const BinaryMask m = i % 3 ? testing::random_blobs(rng, 64, 48) : testing::random_mask(rng, 40, 40, 0.45);
        const BinaryMask r = largest_region(m);
        expect(r == testing::largest_oracle(m), "differs from flood-fill oracle");
        const std::size_t n = testing::components(r).size();
        expect(n == (m.count() ? 1u : 0u), "not a single component");
        expect(testing::fill_from_outside(r) == r, "holes remain");
        nonempty += n;
    }
    return "100 masks (" + std::to_string(nonempty) + " non-empty)";
}

std::string kernels_and_golden()
{
    std::mt19937 rng(404);
    std::uniform_int_distribution<int> dim(1, 8), ch(1, 6);
    double conv = 0, up = 0, pool = 0;
    for (int i = 0; i < 50; ++i) {
        const int k = i % 2 ? 3 : 1;
        const std::size_t cin = ch(rng), cout = ch(rng), h = 2 * dim(rng), w = 2 * dim(rng);
        const Tensor x = testing::random_tensor(rng, {cin, h, w});
        const Tensor wt = testing::random_tensor(rng, {cout, cin, std::size_t(k), std::size_t(k)});
        const Tensor b = testing::random_tensor(rng, {cout});
        conv = std::max(conv, testing::max_abs_diff(kernels::conv2d(x, wt, b, k / 2), reference::conv2d(x, wt, b, k / 2)));
        const Tensor uw = testing::random_tensor(rng, {cin, cout, 2, 2});
        up = std::max(up, testing::max_abs_diff(kernels::upconv2(x, uw, b), reference::upconv2(x, uw, b)));
        pool = std::max(pool, testing::max_abs_diff(kernels::maxpool2(x), reference::maxpool2(x)));
    }
    expect(conv <= 1e-5 && up <= 1e-5 && pool <= 1e-5, "kernel oracle mismatch");

    const UNet net(load_weights(testing::fixture("tiny_unet.unetw")));
    const PlaneFile golden = read_plane_file(testing::fixture("tiny_golden.prob.f32"));
    const Tensor prob = kernels::sigmoid(net.logits(testing::analytic_input(), ForwardOptions{true}));
    double g = 0;
    for (std::size_t i = 0; i < prob.size(); ++i)
        g = std::max(g, std::abs(static_cast<double>(prob.data()[i]) - golden.planes.at(0).data()[i]));
    expect(g <= 1e-5, "golden max-abs " + fmt("%.3g", g));
    return "conv " + fmt("%.1e", conv) + ", upconv " + fmt("%.1e", up) + ", pool " + fmt("%.1e", pool) +
           ", golden " + fmt("%.1e", g);
}

std::string architecture()
{
    const WeightStore good = load_weights(testing::fixture("tiny_unet.unetw"));
    const UNetSpec spec = infer_spec(good);
    expect(validate(good, spec).empty(), "fixture rejected");
    expect(good.at("enc1.conv1.weight").dim(1) == 5, "fixture input channels");
    int rejected = 0;
    for (const auto& m : testing::weight_mutations()) {
        WeightStore bad = good;
        m.apply(bad);
        const auto problems = validate(bad, spec);
        expect(!problems.empty(), m.description + ": accepted");
        for (const auto& p : problems)
            expect(p.rfind(m.layer + ":", 0) == 0, m.description + ": reported '" + p + "'");
        ++rejected;
    }
    return "fixture accepted, " + std::to_string(rejected) + " mutants rejected with layer named";
}

std::string enhancement()
{
    std::mt19937 rng(505);
    std::uniform_int_distribution<int> side(24, 160);
    for (int i = 0; i < 50; ++i) {
        const ImageU8 img = i % 2 ? testing::random_rgb(rng, side(rng), side(rng))
                                  : testing::synthetic_lesion(rng, side(rng), side(rng));
        const IntensityTransform f = ldr_transform(build_hist2d(intensity(img)), 2.5);
        expect(f.lut[0] == 0.0 && f.lut[255] == 255.0, "LUT endpoints");
        for (int k = 0; k < 255; ++k)
            expect(f.lut[k + 1] >= f.lut[k], "LUT not monotone");

        double worst = 0;
        const auto planes = hue_preserving_color_planes(img, f);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                const double l = (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0;
                const double t = f(l);
                for (int c = 0; c < 3; ++c) {
                    const double in = img.at(x, y, c), out = planes[c].at(x, y);
                    expect(out >= 0.0 && out <= 255.0, "colour out of gamut");
                    double want = in;
                    if (t <= l && l > 0)
                        want = t / l * in;
                    else if (t > l)
                        want = 255 - (255 - t) / (255 - l) * (255 - in);
                    worst = std::max(worst, std::abs(out - want) / 255.0);
                }
            }
        expect(worst <= 0.5 / 255.0, "hue ratio off by " + fmt("%.3g", worst));
    }

    for (std::uint8_t v : {0, 37, 128, 255}) {
        const ImageU8 flat(33, 21, 3, v);
        const IntensityTransform f = ldr_transform(build_hist2d(intensity(flat)));
        for (int k = 0; k < 256; ++k)
            expect(f.lut[k] == k, "constant image LUT not identity");
        const PlaneF32 contrast = ldr_contrast(flat);
        for (float p : contrast.data())
            expect(p == v, "constant image contrast changed");
        const PlaneF32 texture = fractional_texture(flat);
        for (float p : texture.data())
            expect(p == 0.0f, "constant image texture non-zero");
    }

    const auto c = gl_coefficients(0.5, 4);
    const double want[4] = {1.0, -0.5, -0.125, -0.0625};
    for (int k = 0; k < 4; ++k)
        expect(std::abs(c[k] - want[k]) <= 1e-12, "fractional coefficient " + std::to_string(k));
    return "50 images; constants identity/zero; coefficients exact";
}

std::string determinism()
{
    const fs::path root = testing::scratch_dir("acceptance_det");
    RunConfig cfg;
    cfg.input_dirs = {testing::fixture("images")};
    cfg.mask_dir = testing::fixture("masks");
    cfg.weights = {testing::fixture("tiny_unet.unetw")};

    auto run = [&](const std::string& tag, int threads) {
        cfg.output_dir = root / tag;
        cfg.threads = threads;
        const CommandResult r = cmd_pipeline(cfg);
        expect(r.ok() && r.images.size() == 5, tag + ": pipeline failed");
    };
    run("t1a", 1);
    run("t1b", 1);
    run("t4", 4);

    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(root / "t1a")) {
        const auto name = e.path().filename();
        if (name == "manifest.json")
            continue;
        const std::string a = slurp(e.path());
        expect(a == slurp(root / "t1b" / name), name.string() + " differs between runs");
        expect(a == slurp(root / "t4" / name), name.string() + " differs between 1 and 4 threads");
        ++compared;
    }
    expect(compared == 7, "expected 5 masks and 2 reports");
    fs::remove_all(root);
    return "5 masks + 2 reports byte-identical over 3 runs";
}

std::string ensemble()
{
    std::mt19937 rng(606);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<ProbMap> maps;
    for (int i = 0; i < 25; ++i) {
        ProbMap p(128, 128);
        for (float& v : p.data())
            v = u(rng);
        maps.push_back(std::move(p));
    }
    for (int n : {1, 2, 25})
        expect(ensemble_average(std::vector<ProbMap>(n, maps[0])) == maps[0], "identical maps not identity");
    const ProbMap avg = ensemble_average(maps);
    double worst = 0;
    for (std::size_t px = 0; px < avg.size(); ++px) {
        double s = 0;
        for (const auto& m : maps)
            s += m.data()[px];
        worst = std::max(worst, std::abs(avg.data()[px] - s / 25));
    }
    expect(worst <= 1e-6, "average off by " + fmt("%.3g", worst));
    return "identity for N=1,2,25; 25 maps max err " + fmt("%.1e", worst);
}

}  // namespace

int main()
{
    std::printf("lesionseg acceptance (%d OpenMP threads available)\n", omp_get_max_threads());
    criterion("metric formulas", 5, metric_formulas);
    criterion("thresholded jaccard", 0, thresholded);
    criterion("morphology", 10, morphology);
    criterion("largest region", 0, largest);
    criterion("kernels and golden forward", 30, kernels_and_golden);
    criterion("architecture contract", 0, architecture);
    criterion("enhancement properties", 20, enhancement);
    criterion("end-to-end determinism", 60, determinism);
    criterion("ensemble average", 0, ensemble);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures ? 1 : 0;
}
