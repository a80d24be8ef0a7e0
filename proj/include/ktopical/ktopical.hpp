#pragma once

#include "ktopical/core.hpp"
#include "ktopical/dynamics.hpp"
#include "ktopical/verify.hpp"
#include "ktopical/mas.hpp"
#include "ktopical/models.hpp"
#include "ktopical/io.hpp"
