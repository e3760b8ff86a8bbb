#ifndef PPARAB_VERSION_HPP
#define PPARAB_VERSION_HPP

#define PPARAB_VERSION "1.0.0"

#endif
