#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <utility>
#include <vector>

// Data-parallel kernels. Each OpenMP kernel has a serial twin that defines the
// expected result; reductions merge per-thread candidates by (value, index) so
// the answer does not depend on the thread count or schedule. An exception
// thrown by the callable is rethrown on the calling thread after the region.

namespace aoi::parallel {

struct ScanMin {
    std::size_t index = 0;
    double value = std::numeric_limits<double>::infinity();
    bool found = false;
};

struct GridMin {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = std::numeric_limits<double>::infinity();
    bool found = false;
};

namespace detail {

// (value, index) lexicographic order. NaN candidates are skipped.
inline bool improves(double v, std::size_t i, bool have, double best_v, std::size_t best_i)
{
    if (std::isnan(v)) {
        return false;
    }
    return !have || v < best_v || (v == best_v && i < best_i);
}

class ExceptionSlot {
public:
    void capture() noexcept
    {
#pragma omp critical(aoi_parallel_exception)
        {
            if (!error_) {
                error_ = std::current_exception();
            }
        }
    }
    void rethrow() const
    {
        if (error_) {
            std::rethrow_exception(error_);
        }
    }

private:
    std::exception_ptr error_;
};

} // namespace detail

/// Smallest f(i) over i in [0, count); ties go to the smallest index.
template <class Fn>
ScanMin argmin_serial(std::size_t count, Fn&& f)
{
    ScanMin best;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = f(i);
        if (detail::improves(v, i, best.found, best.value, best.index)) {
            best = {i, v, true};
        }
    }
    return best;
}

template <class Fn>
ScanMin argmin_omp(std::size_t count, Fn&& f)
{
    const auto n = static_cast<std::ptrdiff_t>(count);
    ScanMin best;
    detail::ExceptionSlot error;
#pragma omp parallel
    {
        ScanMin local;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            try {
                const double v = f(idx);
                if (detail::improves(v, idx, local.found, local.value, local.index)) {
                    local = {idx, v, true};
                }
            } catch (...) {
                error.capture();
            }
        }
#pragma omp critical(aoi_argmin_merge)
        {
            if (local.found && detail::improves(local.value, local.index, best.found, best.value, best.index)) {
                best = local;
            }
        }
    }
    error.rethrow();
    return best;
}

/// Smallest f(r, c) over a rows x cols grid; ties go to the lexicographically smallest (r, c).
template <class Fn>
GridMin argmin_grid_serial(std::size_t rows, std::size_t cols, Fn&& f)
{
    GridMin best;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = f(r, c);
            if (detail::improves(v, r * cols + c, best.found, best.value, best.row * cols + best.col)) {
                best = {r, c, v, true};
            }
        }
    }
    return best;
}

template <class Fn>
GridMin argmin_grid_omp(std::size_t rows, std::size_t cols, Fn&& f)
{
    const auto nrows = static_cast<std::ptrdiff_t>(rows);
    GridMin best;
    detail::ExceptionSlot error;
#pragma omp parallel
    {
        GridMin local;
#pragma omp for schedule(dynamic, 1) nowait
        for (std::ptrdiff_t ri = 0; ri < nrows; ++ri) {
            const auto r = static_cast<std::size_t>(ri);
            try {
                for (std::size_t c = 0; c < cols; ++c) {
                    const double v = f(r, c);
                    if (detail::improves(v, r * cols + c, local.found, local.value, local.row * cols + local.col)) {
                        local = {r, c, v, true};
                    }
                }
            } catch (...) {
                error.capture();
            }
        }
#pragma omp critical(aoi_grid_merge)
        {
            if (local.found
                && detail::improves(local.value, local.row * cols + local.col, best.found, best.value,
                                    best.row * cols + best.col)) {
                best = local;
            }
        }
    }
    error.rethrow();
    return best;
}

/// out[i] = f(i), in index order.
template <class Fn>
auto map_serial(std::size_t count, Fn&& f) -> std::vector<decltype(f(std::size_t{}))>
{
    std::vector<decltype(f(std::size_t{}))> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(f(i));
    }
    return out;
}

/// out[i] = f(i); f must be safe to call concurrently. Results land in index order.
template <class Fn>
auto map_omp(std::size_t count, Fn&& f) -> std::vector<decltype(f(std::size_t{}))>
{
    std::vector<decltype(f(std::size_t{}))> out(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
    detail::ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
            error.capture();
        }
    }
    error.rethrow();
    return out;
}

/// Threads the OpenMP runtime would use for the kernels above.
int max_threads();

} // namespace aoi::parallel
