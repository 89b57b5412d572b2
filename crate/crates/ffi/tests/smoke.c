#include <stdio.h>
#include "mkit.h"

static const char *SADDLE =
    "{\"n\": 2, \"order\": 4, \"backend\": \"exact\", \"coefficients\": ["
    "{\"index\": [2, 0], \"value\": \"1/2\"}, {\"index\": [0, 2], \"value\": \"-1/2\"},"
    "{\"index\": [3, 0], \"value\": \"2/3\"}, {\"index\": [1, 2], \"value\": \"-3/4\"},"
    "{\"index\": [4, 0], \"value\": \"5/7\"}, {\"index\": [2, 2], \"value\": \"1\"}]}";

int main(void) {
    MkitGerm *g = NULL;
    if (mkit_germ_from_json(SADDLE, &g) != MKIT_OK) {
        fprintf(stderr, "parse: %s\n", mkit_last_error_message());
        return 1;
    }
    char *beta = NULL;
    if (mkit_beta(g, &beta) != MKIT_OK) {
        fprintf(stderr, "beta: %s\n", mkit_last_error_message());
        return 1;
    }
    printf("beta = %s\n", beta);
    mkit_string_free(beta);
    if (mkit_classify_json(g, NULL, &beta) != MKIT_NOT_DARBOUX) {
        return 1;
    }
    mkit_germ_free(g);
    return 0;
}
