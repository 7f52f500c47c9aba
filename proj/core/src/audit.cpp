#include "covertime/common.hpp"
