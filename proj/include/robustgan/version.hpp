#ifndef ROBUSTGAN_VERSION_HPP
#define ROBUSTGAN_VERSION_HPP

namespace robustgan {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
