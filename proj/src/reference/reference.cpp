#include "lesionseg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lesionseg::reference {

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int padding)
{
    const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t oh = h + 2 * padding - k + 1;
    const std::size_t ow = wd + 2 * padding - k + 1;
    Tensor out({cout, oh, ow});
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = b.data()[co];
                for (std::size_t ci = 0; ci < cin; ++ci)
                    for (std::size_t ky = 0; ky < k; ++ky)
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const long iy = static_cast<long>(oy + ky) - padding;
                            const long ix = static_cast<long>(ox + kx) - padding;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd))
                                continue;
                            acc += static_cast<double>(w.data()[((co * cin + ci) * k + ky) * k + kx]) *
                                   x.data()[(ci * h + iy) * wd + ix];
                        }
                out.data()[(co * oh + oy) * ow + ox] = static_cast<float>(acc);
            }
    return out;
}

Tensor upconv2(const Tensor& x, const Tensor& w, const Tensor& b)
{
    const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const std::size_t cout = w.dim(1);
    std::vector<double> acc(cout * 2 * h * 2 * wd, 0.0);
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t i = 0; i < 4 * h * wd; ++i)
            acc[co * 4 * h * wd + i] = b.data()[co];
    for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t iy = 0; iy < h; ++iy)
            for (std::size_t ix = 0; ix < wd; ++ix)
                for (std::size_t co = 0; co < cout; ++co)
                    for (std::size_t a = 0; a < 2; ++a)
                        for (std::size_t c = 0; c < 2; ++c)
                            acc[(co * 2 * h + 2 * iy + a) * 2 * wd + 2 * ix + c] +=
                                static_cast<double>(x.data()[(ci * h + iy) * wd + ix]) *
                                w.data()[((ci * cout + co) * 2 + a) * 2 + c];
    return Tensor({cout, 2 * h, 2 * wd}, std::vector<float>(acc.begin(), acc.end()));
}

Tensor maxpool2(const Tensor& x)
{
    const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
    Tensor out({c, h / 2, wd / 2});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t oy = 0; oy < h / 2; ++oy)
            for (std::size_t ox = 0; ox < wd / 2; ++ox) {
                float m = -std::numeric_limits<float>::infinity();
                for (std::size_t dy = 0; dy < 2; ++dy)
                    for (std::size_t dx = 0; dx < 2; ++dx)
                        m = std::max(m, x.data()[(ch * h + 2 * oy + dy) * wd + 2 * ox + dx]);
                out.data()[(ch * (h / 2) + oy) * (wd / 2) + ox] = m;
            }
    return out;
}

namespace {

BinaryMask window_op(const BinaryMask& m, int se_size, bool want_all)
{
    const int r = se_size / 2;
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            bool any = false;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = x + dx;
                    const int sy = y + dy;
                    const bool v = sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && m.at(sx, sy);
                    all = all && v;
                    any = any || v;
                }
            out.set(x, y, want_all ? all : any);
        }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m, int se_size)
{
    return window_op(m, se_size, true);
}

BinaryMask dilate(const BinaryMask& m, int se_size)
{
    return window_op(m, se_size, false);
}

BinaryMask close(const BinaryMask& m, int se_size)
{
    const int r = se_size / 2;
    BinaryMask canvas(m.width() + 2 * r, m.height() + 2 * r);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            canvas.set(x + r, y + r, m.at(x, y));
    const BinaryMask closed = reference::erode(reference::dilate(canvas, se_size), se_size);
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            out.set(x, y, closed.at(x + r, y + r));
    return out;
}

PlaneF32 fractional_magnitude(const PlaneF32& intensity, const TextureConfig& cfg)
{
    static constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, -1}, {0, 1}, {1, -1}, {-1, -1}, {1, 1}, {-1, 1}};
    const int w = intensity.width();
    const int h = intensity.height();
    PlaneF32 out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sum_sq = 0.0;
            for (const auto& d : kDirs) {
                double coeff = 1.0;
                double response = 0.0;
                for (int t = 0; t < cfg.terms; ++t) {
                    if (t > 0)
                        coeff *= (t - 1 - cfg.v) / t;
                    const int sx = std::min(std::max(x + t * d[0], 0), w - 1);
                    const int sy = std::min(std::max(y + t * d[1], 0), h - 1);
                    response += coeff * intensity.at(sx, sy);
                }
                sum_sq += response * response;
            }
            out.at(x, y) = static_cast<float>(std::sqrt(sum_sq));
        }
    return out;
}

}  // namespace lesionseg::reference
