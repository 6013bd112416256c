#include <pybind11/pybind11.h>
PYBIND11_MODULE(_bvmlab, m) { m.doc() = "placeholder"; }
