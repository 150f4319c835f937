#pragma once

// Babel-17 v0.3.2 interpreter: lexer, parser, analyzer, runtime, stdlib,
// module system and runner. Header-only; link against gmp/gmpxx and threads.

#include "babel17/source.hpp"
#include "babel17/unicode.hpp"
#include "babel17/bigint.hpp"
#include "babel17/interval.hpp"
#include "babel17/token.hpp"
#include "babel17/lexer.hpp"
#include "babel17/ast.hpp"
#include "babel17/parser.hpp"
#include "babel17/analyze.hpp"
#include "babel17/ast_print.hpp"
#include "babel17/value.hpp"
#include "babel17/ordtree.hpp"
#include "babel17/engine.hpp"
#include "babel17/interp.hpp"
#include "babel17/builtins.hpp"
#include "babel17/render.hpp"
#include "babel17/interp_impl.hpp"
#include "babel17/runner.hpp"
