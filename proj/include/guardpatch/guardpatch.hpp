#pragma once

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/block_extractor.hpp"
#include "guardpatch/call_sites.hpp"
#include "guardpatch/diff.hpp"
#include "guardpatch/error.hpp"
#include "guardpatch/normalizer.hpp"
#include "guardpatch/patch_engine.hpp"
#include "guardpatch/pipeline.hpp"
#include "guardpatch/synthesizer.hpp"
#include "guardpatch/syntax/ast.hpp"
#include "guardpatch/syntax/lexer.hpp"
#include "guardpatch/syntax/parser.hpp"
#include "guardpatch/syntax/splice.hpp"
#include "guardpatch/version_guard.hpp"
