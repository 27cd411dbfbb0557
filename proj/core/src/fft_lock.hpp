#pragma once

#include <mutex>

namespace riesz::detail {

// FFTW planning is not thread safe; every plan create/destroy takes this lock.
std::mutex& fftw_mutex();

}  // namespace riesz::detail
