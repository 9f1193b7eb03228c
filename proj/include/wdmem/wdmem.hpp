#pragma once

#include "wdmem/dbmd.hpp"
#include "wdmem/errors.hpp"
#include "wdmem/identify.hpp"
#include "wdmem/io.hpp"
#include "wdmem/models.hpp"
#include "wdmem/scenario.hpp"
#include "wdmem/wdf.hpp"
