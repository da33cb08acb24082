#pragma once

#include "spinsnr/bloch.hpp"
#include "spinsnr/ernst.hpp"
#include "spinsnr/errors.hpp"
#include "spinsnr/io.hpp"
#include "spinsnr/optimize.hpp"
#include "spinsnr/oracle.hpp"
#include "spinsnr/parallel.hpp"
#include "spinsnr/qsurface.hpp"
#include "spinsnr/synthesis.hpp"
#include "spinsnr/trajectory.hpp"
#include "spinsnr/verify.hpp"
