#pragma once
// Convenience umbrella for the whole library.

#include "patchcomm/concept.hpp"
#include "patchcomm/errors.hpp"
#include "patchcomm/eval.hpp"
#include "patchcomm/kb.hpp"
#include "patchcomm/morph.hpp"
#include "patchcomm/protocol.hpp"
#include "patchcomm/resolver.hpp"
#include "patchcomm/scorer.hpp"
