#ifndef HSZ_HSZ_HPP
#define HSZ_HSZ_HPP

#include "hsz/codec.hpp"
#include "hsz/compressors.hpp"
#include "hsz/container.hpp"
#include "hsz/derivatives.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"
#include "hsz/grid.hpp"
#include "hsz/io.hpp"
#include "hsz/kind.hpp"
#include "hsz/quant.hpp"
#include "hsz/stages.hpp"
#include "hsz/stats.hpp"
#include "hsz/streaming.hpp"

#endif
