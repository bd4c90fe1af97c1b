#ifndef TENSPECT_TENSPECT_HPP
#define TENSPECT_TENSPECT_HPP

#include "tenspect/extrapolation.hpp"
#include "tenspect/ingestion.hpp"
#include "tenspect/spectral.hpp"
#include "tenspect/tensor.hpp"

#endif  // TENSPECT_TENSPECT_HPP
