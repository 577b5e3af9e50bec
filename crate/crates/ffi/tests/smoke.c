#include <stdio.h>
#include <string.h>
#include "cexcheck.h"

int main(void) {
    CexProgram *p = NULL;
    CexReport *r = NULL;
    char *s = NULL;

    if (cex_program_parse("check comm(A,)", &p) != CEX_STATUS_PARSE_ERROR) return 1;
    if (strstr(cex_last_error_message(), "1:14") == NULL) return 2;

    if (cex_program_parse("A := mult(exp(x^2))\ncheck A*A bounded", &p) != CEX_STATUS_OK) return 3;
    if (cex_program_execute(p, &r) != CEX_STATUS_OK) return 4;
    if (cex_report_passed(r) != 1) return 5;
    if (cex_report_json(r, &s) != CEX_STATUS_OK || strstr(s, "refuted") == NULL) return 6;
    cex_string_free(s);
    cex_report_free(r);
    cex_program_free(p);

    if (cex_scenario_count() != 7) return 7;
    if (cex_scenario_id(0, &s) != CEX_STATUS_OK || strcmp(s, "S1") != 0) return 8;
    cex_string_free(s);
    if (cex_scenario_run("S1", &r) != CEX_STATUS_OK || cex_report_passed(r) != 1) return 9;
    if (cex_report_markdown(r, &s) != CEX_STATUS_OK || strstr(s, "S1 PASS") == NULL) return 10;
    cex_string_free(s);
    cex_report_free(r);
    if (cex_scenario_run("S9", &r) != CEX_STATUS_UNKNOWN_SCENARIO) return 11;
    puts("ok");
    return 0;
}
