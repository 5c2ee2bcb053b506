#include <stdio.h>
#include "subrig.h"

int main(void) {
    const char *doc = "{\"grading\":[2,3],\"structure\":[{\"i\":1,\"j\":2,\"k\":3,\"c\":\"1\"}],\"alpha_sq\":[\"1\",\"4\"]}";
    SubrigFrame *frame = NULL;
    SubrigReport *report = NULL;
    if (subrig_frame_from_json(doc, &frame, NULL) != SUBRIG_STATUS_OK) return 1;
    SubrigStatus st = subrig_analyze(frame, 0, 0, &report);
    puts(subrig_report_json(report));
    subrig_report_free(report);
    subrig_frame_free(frame);
    return st == SUBRIG_STATUS_OK ? 0 : 1;
}
