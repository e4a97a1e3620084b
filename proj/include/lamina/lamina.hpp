#pragma once

// Umbrella header: math data in, printable G-code out.

#include "lamina/expr.hpp"
#include "lamina/geometry.hpp"
#include "lamina/heightfield.hpp"
#include "lamina/mesh.hpp"
#include "lamina/preview.hpp"
#include "lamina/slicer.hpp"
#include "lamina/stl_io.hpp"
#include "lamina/toolpath.hpp"
