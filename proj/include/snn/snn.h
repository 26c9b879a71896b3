/* C interface to the spiking network engine.
 *
 * Every function returns an snn_status. On failure the message for the
 * calling thread is available from snn_last_error() until the next call.
 * Handles are opaque and must be released with the matching *_free.
 */
#ifndef SNN_SNN_H
#define SNN_SNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(SNN_BUILDING_LIBRARY)
#define SNN_API __attribute__((visibility("default")))
#else
#define SNN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum snn_status {
  SNN_OK = 0,
  SNN_ERR_USAGE = 1,   /* bad argument, option or configuration value */
  SNN_ERR_DATA = 2,    /* unreadable or malformed input data */
  SNN_ERR_NUMERIC = 3, /* non-finite values, undefined SNR */
  SNN_ERR_MODEL = 4,   /* checkpoint or model/input mismatch */
  SNN_ERR_INTERNAL = 5
} snn_status;

typedef struct snn_config snn_config;
typedef struct snn_dataset snn_dataset;
typedef struct snn_model snn_model;
typedef struct snn_guidance snn_guidance;

typedef enum snn_split { SNN_SPLIT_TRAIN = 0, SNN_SPLIT_TEST = 1, SNN_SPLIT_ALL = 2 } snn_split;

typedef enum snn_train_mode {
  SNN_TRAIN_UNSUP_SINGLE = 0,
  SNN_TRAIN_UNSUP_BILAYER = 1
} snn_train_mode;

SNN_API const char* snn_last_error(void);
SNN_API const char* snn_status_name(snn_status status);

/* Configuration */
SNN_API snn_status snn_config_new(snn_config** out);
SNN_API snn_status snn_config_load(const char* path, snn_config** out);
SNN_API snn_status snn_config_set(snn_config* config, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf; *needed receives the full length + 1. */
SNN_API snn_status snn_config_get(const snn_config* config, const char* key, char* buf, size_t len,
                                  size_t* needed);
SNN_API void snn_config_free(snn_config* config);

/* Datasets */
SNN_API snn_status snn_dataset_load(const char* root, double test_fraction, uint64_t seed,
                                    snn_dataset** out);
SNN_API snn_status snn_dataset_generate(const char* root, int class_count, int per_class,
                                        int test_per_class, int size, uint64_t seed,
                                        snn_dataset** out);
/* Orthogonal blob fixture (one smooth blob per class, disjoint positions). */
SNN_API snn_status snn_dataset_generate_fixture(const char* root, int class_count, int per_class,
                                                int test_per_class, int size, uint64_t seed,
                                                snn_dataset** out);
SNN_API int snn_dataset_class_count(const snn_dataset* data);
SNN_API int snn_dataset_size(const snn_dataset* data, snn_split split);
SNN_API void snn_dataset_free(snn_dataset* data);

/* Encoding and tracing */
SNN_API snn_status snn_encode_image(const char* image_path, const snn_config* config, uint64_t seed,
                                    const char* out_path);
/* input_path is a spike-field file or an image (encoded with seed).
   weights_path is a checkpoint or a CSV of m rows x n columns. */
SNN_API snn_status snn_trace(const char* input_path, const char* weights_path,
                             const snn_config* config, uint64_t seed, const char* out_csv);

/* Training. history_csv may be NULL. */
SNN_API snn_status snn_train_unsupervised(const snn_config* config, const snn_dataset* data,
                                          snn_train_mode mode, int epochs, uint64_t seed,
                                          const char* history_csv, snn_model** out);
SNN_API snn_status snn_guidance_extract(const snn_model* model, const snn_dataset* data,
                                        uint64_t seed, snn_guidance** out);
SNN_API snn_status snn_guidance_load(const char* csv_path, snn_guidance** out);
SNN_API snn_status snn_guidance_save(const snn_guidance* guidance, const char* csv_path);
SNN_API void snn_guidance_free(snn_guidance* guidance);
SNN_API snn_status snn_train_supervised(const snn_config* config, const snn_dataset* data,
                                        const snn_guidance* guidance, int epochs, uint64_t seed,
                                        const char* history_csv, snn_model** out);

/* Models */
SNN_API snn_status snn_model_load(const char* path, snn_model** out);
SNN_API snn_status snn_model_save(const snn_model* model, const char* path);
SNN_API void snn_model_free(snn_model* model);
/* Replaces a supervised model's guidance traces. */
SNN_API snn_status snn_model_set_guidance(snn_model* model, const snn_guidance* guidance);
SNN_API int snn_model_class_count(const snn_model* model);
/* Class name copied into buf, NUL-terminated and truncated to len. */
SNN_API snn_status snn_model_class_name(const snn_model* model, int label, char* buf, size_t len);

typedef struct snn_stats {
  int64_t parameters;
  int64_t bytes;
  int64_t macs_per_tu;
  int64_t macs_per_image;
  int layer_count; /* number of weight matrices */
  int topology[8];
} snn_stats;

SNN_API snn_status snn_model_stats(const snn_model* model, snn_stats* out);
SNN_API snn_status snn_export_features(const snn_model* model, const char* prefix, int* written);

/* Inference. *label is -1 when the network gives no decision. */
SNN_API snn_status snn_classify_file(const snn_model* model, const char* image_path, uint64_t seed,
                                     int* label);
SNN_API snn_status snn_evaluate(const snn_model* model, const snn_dataset* data, snn_split split,
                                uint64_t seed, int jobs, const char* report_csv, double* accuracy);
SNN_API snn_status snn_noise_sweep(const snn_model* model, const snn_dataset* data,
                                   const double* snr_db, size_t count, uint64_t seed, int jobs,
                                   const char* sweep_csv, double* accuracies);

#ifdef __cplusplus
}
#endif

#endif /* SNN_SNN_H */
