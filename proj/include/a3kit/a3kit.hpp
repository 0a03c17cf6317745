#pragma once

#include <a3kit/config.hpp>
#include <a3kit/corpus_prep.hpp>
#include <a3kit/error.hpp>
#include <a3kit/evaluator.hpp>
#include <a3kit/exec_generator.hpp>
#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/java_tokens.hpp>
#include <a3kit/ngram.hpp>
#include <a3kit/random.hpp>
#include <a3kit/report_convert.hpp>
#include <a3kit/serialize.hpp>
#include <a3kit/static_runner.hpp>
#include <a3kit/verifier.hpp>
#include <a3kit/workers.hpp>
