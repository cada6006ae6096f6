#ifndef HERGM_VERSION_HPP
#define HERGM_VERSION_HPP

namespace hergm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hergm

#endif
