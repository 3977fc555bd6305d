#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qchan.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      char msg[512];                                                  \
      qchan_last_error(msg, sizeof msg);                              \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, msg); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

static const char *BASIS =
    "[{\"prob\": 0.5, \"state\": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},"
    " {\"prob\": 0.5, \"state\": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}]";

int main(void) {
  QchanChannel *trine = NULL;
  QchanEnsemble *ens = NULL;
  CHECK(qchan_channel_named("trine", &trine) == QCHAN_STATUS_OK);
  CHECK(qchan_ensemble_from_json(BASIS, &ens) == QCHAN_STATUS_OK);

  size_t din = 0, dout = 0;
  CHECK(qchan_channel_dims(trine, &din, &dout) == QCHAN_STATUS_OK);
  CHECK(din == 2 && dout == 3);

  QchanAudit audit;
  CHECK(qchan_audit(trine, ens, &audit) == QCHAN_STATUS_OK);
  CHECK(!audit.reversible && audit.gap > 0.0);

  QchanCapacityOptions opts = qchan_capacity_options_default();
  opts.restarts = 2;
  QchanCapacity cap;
  CHECK(qchan_holevo_capacity(trine, &opts, &cap) == QCHAN_STATUS_OK);
  CHECK(fabs(cap.value - (log2(3.0) - 1.0)) < 1e-4);

  QchanChannel *bad = NULL;
  CHECK(qchan_channel_named("nope", &bad) == QCHAN_STATUS_INVALID_INPUT);
  CHECK(bad == NULL);
  char msg[256];
  CHECK(qchan_last_error(msg, sizeof msg) > 1 && strstr(msg, "nope") != NULL);

  printf("qchan %s: trine capacity %.6f\n", qchan_version(), cap.value);
  qchan_ensemble_free(ens);
  qchan_channel_free(trine);
  return 0;
}
