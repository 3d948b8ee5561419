#pragma once

#include "iochunk/chunk_apply.hpp"
#include "iochunk/chunker.hpp"
#include "iochunk/error.hpp"
#include "iochunk/field.hpp"
#include "iochunk/frame.hpp"
#include "iochunk/frame_parser.hpp"
#include "iochunk/matrix.hpp"
#include "iochunk/matrix_parser.hpp"
#include "iochunk/model_matrix.hpp"
#include "iochunk/naive_parser.hpp"
#include "iochunk/ols.hpp"
#include "iochunk/source.hpp"
#include "iochunk/writer.hpp"
