#pragma once

#include "fssa/aead.hpp"
#include "fssa/bench.hpp"
#include "fssa/bytes.hpp"
#include "fssa/client.hpp"
#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/hash.hpp"
#include "fssa/key_agreement.hpp"
#include "fssa/messages.hpp"
#include "fssa/params.hpp"
#include "fssa/ramp.hpp"
#include "fssa/random.hpp"
#include "fssa/server.hpp"
#include "fssa/sim.hpp"
