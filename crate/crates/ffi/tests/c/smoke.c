/* SPDX-License-Identifier: MIT OR Apache-2.0 */
#include <stdio.h>
#include <string.h>
#include "radar.h"

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: smoke MODEL TRACE\n");
        return 64;
    }
    RadarModel *model = NULL;
    RadarTrace *trace = NULL;
    if (radar_model_load(argv[1], &model) != RADAR_STATUS_OK) {
        fprintf(stderr, "model: %s\n", radar_last_error_message());
        return 1;
    }
    if (radar_trace_load(argv[2], &trace) != RADAR_STATUS_OK) {
        fprintf(stderr, "trace: %s\n", radar_last_error_message());
        return 1;
    }
    double features[64];
    if (radar_extract_features(trace, features, 2) != RADAR_STATUS_BUFFER_TOO_SMALL) return 2;
    if (radar_extract_features(trace, features, 64) != RADAR_STATUS_OK) return 3;
    RadarPrediction p;
    if (radar_model_predict_trace(model, trace, &p) != RADAR_STATUS_OK) return 4;
    printf("%s %s %.17g %zu\n", radar_version(),
           p.label == RADAR_LABEL_RECALL ? "recall" : "reasoning", p.confidence,
           radar_feature_count());
    printf("%s\n", radar_feature_name(0));
    radar_trace_free(trace);
    radar_model_free(model);
    return 0;
}
