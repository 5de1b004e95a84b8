// Copyright 2026 The mgrind Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MGRIND_C_API_H_
#define MGRIND_C_API_H_

/* C boundary over the core library. Arrays cross as contiguous float
 * buffers with explicit (N, C, H, W) shapes. Every call returns a status;
 * on failure mgrind_last_error() holds the core's diagnostic text for the
 * calling thread. Handles are not thread-safe; distinct handles are
 * independent. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MGRIND_OK = 0,
  MGRIND_ERR_USAGE = 1,
  MGRIND_ERR_IO = 2,
  MGRIND_ERR_PARSE = 3,
  MGRIND_ERR_FORMAT = 4,
  MGRIND_ERR_SHAPE = 5,
  MGRIND_ERR_CONFIG = 6,
  MGRIND_ERR_VALUE = 7,
  MGRIND_ERR_DIVERGENCE = 8,
  MGRIND_ERR_INTERNAL = 9
} mgrind_status;

typedef struct mgrind_net mgrind_net;
typedef struct mgrind_solver mgrind_solver;

/* Diagnostic of the last failed call on this thread; "" after success. */
const char* mgrind_last_error(void);

/* Builds a forward-only net from a definition and a weights or snapshot
 * file. weights_path may be NULL to keep the fillers' values. batch > 0
 * replaces the batch axis of the input declarations. */
mgrind_status mgrind_net_load(const char* model_path, const char* weights_path,
                              int batch, mgrind_net** out);
/* Releases the net; later calls on the handle fail with MGRIND_ERR_USAGE. */
mgrind_status mgrind_net_close(mgrind_net* net);
/* Destroys the handle itself. NULL is ignored. */
void mgrind_net_free(mgrind_net* net);

mgrind_status mgrind_net_num_inputs(mgrind_net* net, int* count);
mgrind_status mgrind_net_input_shape(mgrind_net* net, int index, int shape[4]);

/* Copies `data` (shape must equal the first input's shape) into the first
 * input, zero-fills any other unset input, and runs forward. */
mgrind_status mgrind_net_forward(mgrind_net* net, const float* data,
                                 const int shape[4]);

mgrind_status mgrind_net_blob_shape(mgrind_net* net, const char* blob, int shape[4]);
/* Copies a blob's data plane into `out`, which holds `capacity` floats. */
mgrind_status mgrind_net_blob_data(mgrind_net* net, const char* blob, float* out,
                                   size_t capacity);

/* Forward followed by a copy of `blob`. */
mgrind_status mgrind_net_extract(mgrind_net* net, const float* data,
                                 const int shape[4], const char* blob, float* out,
                                 size_t capacity);

/* Loads a solver file; MGRIND_SEED overrides its seed. */
mgrind_status mgrind_solver_create(const char* solver_path, mgrind_solver** out);
void mgrind_solver_free(mgrind_solver* solver);

/* Runs up to k iterations, stopping at max_iter. Writes each loss to
 * `losses` (room for k values) and the number run to `count`. */
mgrind_status mgrind_solver_step(mgrind_solver* solver, int k, double* losses,
                                 int* count);
mgrind_status mgrind_solver_iter(mgrind_solver* solver, uint64_t* iter);
mgrind_status mgrind_solver_done(mgrind_solver* solver, int* done);
mgrind_status mgrind_solver_snapshot(mgrind_solver* solver, const char* path);
mgrind_status mgrind_solver_restore(mgrind_solver* solver, const char* path);

#ifdef __cplusplus
}
#endif

#endif  /* MGRIND_C_API_H_ */
