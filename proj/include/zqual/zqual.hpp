#pragma once

/// Umbrella header for the whole library.

#include "zqual/error.hpp"
#include "zqual/format.hpp"
#include "zqual/io.hpp"
#include "zqual/dataset.hpp"
#include "zqual/compressor_spec.hpp"
#include "zqual/config.hpp"
#include "zqual/grid.hpp"
#include "zqual/metrics.hpp"
#include "zqual/spectral.hpp"
#include "zqual/properties.hpp"
#include "zqual/checker.hpp"
#include "zqual/mock_codecs.hpp"
#include "zqual/process.hpp"
#include "zqual/compression.hpp"
#include "zqual/serialize.hpp"
#include "zqual/driver.hpp"
#include "zqual/profile.hpp"
#include "zqual/report.hpp"
#include "zqual/service.hpp"
#include "zqual/cli.hpp"
