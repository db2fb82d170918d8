#include "lesionseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lesionseg/error.hpp"

namespace lesionseg::kernels {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what)
{
    if (t.rank() != rank)
        throw InvalidArgument(std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                              shape_string(t.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int padding)
{
    require_rank(x, 3, "conv2d input");
    require_rank(w, 4, "conv2d weight");
    require_rank(b, 1, "conv2d bias");
    const auto cin = static_cast<int>(x.dim(0));
    const auto h = static_cast<int>(x.dim(1));
    const auto wd = static_cast<int>(x.dim(2));
    const auto cout = static_cast<int>(w.dim(0));
    const auto k = static_cast<int>(w.dim(2));
    if (static_cast<int>(w.dim(1)) != cin || static_cast<int>(w.dim(3)) != k)
        throw InvalidArgument("conv2d weight " + shape_string(w.shape()) + " does not fit input " +
                              shape_string(x.shape()));
    if (static_cast<int>(b.dim(0)) != cout)
        throw InvalidArgument("conv2d bias " + shape_string(b.shape()) + " does not match " +
                              std::to_string(cout) + " output channels");
    if (padding < 0)
        throw InvalidArgument("conv2d padding must be non-negative");
    const int oh = h + 2 * padding - k + 1;
    const int ow = wd + 2 * padding - k + 1;
    if (oh < 1 || ow < 1)
        throw InvalidArgument("conv2d kernel larger than padded input");

    Tensor out({static_cast<std::size_t>(cout), static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
    const float* xp = x.ptr();
    const float* wp = w.ptr();
    const float* bp = b.ptr();
    float* op = out.ptr();
    const std::size_t plane = static_cast<std::size_t>(h) * wd;

#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < cout; ++co) {
        for (int oy = 0; oy < oh; ++oy) {
            float* acc = op + (static_cast<std::size_t>(co) * oh + oy) * ow;
            std::fill(acc, acc + ow, bp[co]);
            for (int ci = 0; ci < cin; ++ci) {
                const float* wk = wp + (static_cast<std::size_t>(co) * cin + ci) * k * k;
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy + ky - padding;
                    if (iy < 0 || iy >= h)
                        continue;
                    const float* row = xp + ci * plane + static_cast<std::size_t>(iy) * wd;
                    for (int kx = 0; kx < k; ++kx) {
                        const float wv = wk[ky * k + kx];
                        const int shift = kx - padding;
                        const int lo = std::max(0, -shift);
                        const int hi = std::min(ow, wd - shift);
                        const float* src = row + shift;
#pragma omp simd
                        for (int ox = lo; ox < hi; ++ox)
                            acc[ox] += wv * src[ox];
                    }
                }
            }
        }
    }
    return out;
}

Tensor upconv2(const Tensor& x, const Tensor& w, const Tensor& b)
{
    require_rank(x, 3, "upconv2 input");
    require_rank(w, 4, "upconv2 weight");
    require_rank(b, 1, "upconv2 bias");
    const auto cin = static_cast<int>(x.dim(0));
    const auto h = static_cast<int>(x.dim(1));
    const auto wd = static_cast<int>(x.dim(2));
    const auto cout = static_cast<int>(w.dim(1));
    if (static_cast<int>(w.dim(0)) != cin || w.dim(2) != 2 || w.dim(3) != 2)
        throw InvalidArgument("upconv2 weight " + shape_string(w.shape()) + " does not fit input " +
                              shape_string(x.shape()));
    if (static_cast<int>(b.dim(0)) != cout)
        throw InvalidArgument("upconv2 bias " + shape_string(b.shape()) + " does not match " +
                              std::to_string(cout) + " output channels");

    const int oh = 2 * h;
    const int ow = 2 * wd;
    Tensor out({static_cast<std::size_t>(cout), static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
    const float* xp = x.ptr();
    const float* wp = w.ptr();
    const float* bp = b.ptr();
    float* op = out.ptr();
    const std::size_t plane = static_cast<std::size_t>(h) * wd;

    // Each output row 2i+a gathers from input row i only.
#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < cout; ++co) {
        for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy / 2;
            const int a = oy % 2;
            float* acc = op + (static_cast<std::size_t>(co) * oh + oy) * ow;
            std::fill(acc, acc + ow, bp[co]);
            for (int ci = 0; ci < cin; ++ci) {
                const float* row = xp + ci * plane + static_cast<std::size_t>(iy) * wd;
                const float* wk = wp + (static_cast<std::size_t>(ci) * cout + co) * 4 + a * 2;
                const float w0 = wk[0];
                const float w1 = wk[1];
                for (int ix = 0; ix < wd; ++ix) {
                    acc[2 * ix] += row[ix] * w0;
                    acc[2 * ix + 1] += row[ix] * w1;
                }
            }
        }
    }
    return out;
}

Tensor maxpool2(const Tensor& x)
{
    require_rank(x, 3, "maxpool2 input");
    const auto c = x.dim(0);
    const auto h = x.dim(1);
    const auto wd = x.dim(2);
    if (h % 2 != 0 || wd % 2 != 0)
        throw InvalidArgument("maxpool2 requires even spatial dims, got " + shape_string(x.shape()));
    const std::size_t oh = h / 2;
    const std::size_t ow = wd / 2;
    Tensor out({c, oh, ow});
    const float* xp = x.ptr();
    float* op = out.ptr();
    const auto rows = static_cast<std::ptrdiff_t>(c * oh);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const std::size_t ch = static_cast<std::size_t>(r) / oh;
        const std::size_t oy = static_cast<std::size_t>(r) % oh;
        const float* top = xp + (ch * h + 2 * oy) * wd;
        const float* bot = top + wd;
        float* dst = op + static_cast<std::size_t>(r) * ow;
        for (std::size_t ox = 0; ox < ow; ++ox)
            dst[ox] = std::max(std::max(top[2 * ox], top[2 * ox + 1]), std::max(bot[2 * ox], bot[2 * ox + 1]));
    }
    return out;
}

Tensor concat(const Tensor& a, const Tensor& b)
{
    require_rank(a, 3, "concat input");
    require_rank(b, 3, "concat input");
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
        throw InvalidArgument("concat spatial mismatch: " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
    Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::memcpy(out.ptr(), a.ptr(), a.size() * sizeof(float));
    std::memcpy(out.ptr() + a.size(), b.ptr(), b.size() * sizeof(float));
    return out;
}

void relu_inplace(Tensor& x)
{
    float* p = x.ptr();
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for simd schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        p[i] = p[i] > 0.0f ? p[i] : 0.0f;
}

Tensor relu(Tensor x)
{
    relu_inplace(x);
    return x;
}

void sigmoid_inplace(Tensor& x)
{
    float* p = x.ptr();
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        p[i] = 1.0f / (1.0f + std::exp(-p[i]));
}

Tensor sigmoid(Tensor x)
{
    sigmoid_inplace(x);
    return x;
}

}  // namespace lesionseg::kernels
