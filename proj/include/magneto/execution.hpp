#pragma once

#include <cstddef>

namespace magneto {

// Selects between the OpenMP kernel and the plain loop it must agree with.
enum class Execution { Serial, Parallel };

// Calls fn(i) for every i in [0, n). Iterations must be independent.
template <typename Fn>
void for_each_index(Execution exec, std::size_t n, Fn &&fn)
{
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < count; ++i)
            fn(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i)
            fn(static_cast<std::size_t>(i));
    }
}

} // namespace magneto
