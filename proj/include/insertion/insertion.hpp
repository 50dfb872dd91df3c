#pragma once

#include "astro.hpp"
#include "closed_loop.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "io.hpp"
#include "mission.hpp"
#include "newton.hpp"
#include "optimizer.hpp"
#include "shooting.hpp"
