#include "lesionseg/morphology.hpp"

#include <algorithm>
#include <string>

namespace lesionseg {

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height)
{
    if (width < 1 || height < 1)
        throw InvalidArgument("mask dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
}

namespace {

void check_se(int se_size)
{
    if (se_size < 1 || se_size % 2 == 0)
        throw InvalidArgument("structuring element size must be odd and >= 1, got " + std::to_string(se_size));
}

enum class Op { Erode, Dilate };

// A square window is separable: a 1-D pass along rows followed by one along
// columns gives the same result as the 2-D window, including the
// background padding at the border. Each pass counts foreground pixels in
// the window with a prefix sum.
void pass_1d(const unsigned char* src, unsigned char* dst, int n, std::ptrdiff_t stride, int radius, Op op,
             std::vector<int>& prefix)
{
    prefix.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + src[i * stride];
    const int full = 2 * radius + 1;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - radius);
        const int hi = std::min(n, i + radius + 1);
        const int count = prefix[hi] - prefix[lo];
        dst[i * stride] = op == Op::Erode ? (count == full ? 1 : 0) : (count > 0 ? 1 : 0);
    }
}

BinaryMask morph(const BinaryMask& m, int se_size, Op op)
{
    check_se(se_size);
    const int radius = se_size / 2;
    const int w = m.width();
    const int h = m.height();
    BinaryMask tmp(w, h);
    BinaryMask out(w, h);
    const unsigned char* src = m.data().data();
    unsigned char* mid = tmp.data().data();
    unsigned char* dst = out.data().data();

#pragma omp parallel
    {
        std::vector<int> prefix;
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y)
            pass_1d(src + static_cast<std::ptrdiff_t>(y) * w, mid + static_cast<std::ptrdiff_t>(y) * w, w, 1, radius,
                    op, prefix);
#pragma omp for schedule(static)
        for (int x = 0; x < w; ++x)
            pass_1d(mid + x, dst + x, h, w, radius, op, prefix);
    }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m, int se_size)
{
    return morph(m, se_size, Op::Erode);
}

BinaryMask dilate(const BinaryMask& m, int se_size)
{
    return morph(m, se_size, Op::Dilate);
}

BinaryMask open(const BinaryMask& m, int se_size)
{
    return dilate(erode(m, se_size), se_size);
}

// The mask is treated as a window onto an unbounded background plane. The
// dilation therefore has to be kept on a canvas extended by the radius,
// otherwise the following erosion would read the truncated border as
// background and strip foreground touching the image edge.
BinaryMask close(const BinaryMask& m, int se_size)
{
    check_se(se_size);
    const int r = se_size / 2;
    if (r == 0)
        return m;
    const int w = m.width();
    const int h = m.height();
    BinaryMask canvas(w + 2 * r, h + 2 * r);
    for (int y = 0; y < h; ++y)
        std::copy_n(m.data().data() + static_cast<std::ptrdiff_t>(y) * w, w,
                    canvas.data().data() + static_cast<std::ptrdiff_t>(y + r) * canvas.width() + r);
    const BinaryMask closed = erode(dilate(canvas, se_size), se_size);
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        std::copy_n(closed.data().data() + static_cast<std::ptrdiff_t>(y + r) * closed.width() + r, w,
                    out.data().data() + static_cast<std::ptrdiff_t>(y) * w);
    return out;
}

BinaryMask mask_not(const BinaryMask& m)
{
    BinaryMask out(m.width(), m.height());
    auto src = m.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] ? 0 : 1;
    return out;
}

}  // namespace lesionseg
