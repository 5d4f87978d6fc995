/* Decode a posterior file with an HMM at a chosen loss order.
 *
 *   cc decode.c -I../include -L../../../target/debug -lminkloss_ffi -o decode
 *   ./decode posteriors.post hmm.json 4
 */
#include <stdio.h>
#include <stdlib.h>

#include "minkloss.h"

int main(int argc, char **argv) {
    if (argc != 4) {
        fprintf(stderr, "usage: %s POSTERIORS HMM ORDER\n", argv[0]);
        return 2;
    }
    MinkMatrix *matrix = NULL;
    MinkHmm *hmm = NULL;
    size_t *path = NULL;
    int code = 1;

    if (mink_matrix_load(argv[1], &matrix) != MINK_STATUS_OK || mink_hmm_load(argv[2], &hmm) != MINK_STATUS_OK) {
        fprintf(stderr, "error: %s\n", mink_last_error());
        goto done;
    }
    size_t frames = mink_matrix_frames(matrix);
    path = malloc(frames * sizeof *path + 1);
    size_t len = 0;
    double score = 0.0;
    MinkStatus status = mink_decode(matrix, hmm, (uint32_t)atoi(argv[3]), true, path, frames, &len, &score);
    if (status != MINK_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", status, mink_last_error());
        goto done;
    }
    for (size_t t = 0; t < len; t++) {
        printf("%s%s", t ? " " : "", mink_hmm_state_label(hmm, path[t]));
    }
    printf("\nlog score %.6f\n", score);
    code = 0;

done:
    free(path);
    mink_matrix_free(matrix);
    mink_hmm_free(hmm);
    return code;
}
