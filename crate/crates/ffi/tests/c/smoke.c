/* SPDX-License-Identifier: Apache-2.0 */

#include <stdio.h>
#include <string.h>

#include "linchk.h"

static const char INSERT_REMOVE[] =
    "{\"kind\":\"call\",\"id\":1,\"obj\":\"s\",\"op\":\"insert\",\"args\":[1],\"result\":true}\n"
    "{\"kind\":\"call\",\"id\":2,\"obj\":\"s\",\"op\":\"remove\",\"args\":[1],\"result\":false}\n"
    "{\"kind\":\"ret\",\"id\":1,\"obj\":\"s\",\"op\":\"insert\",\"args\":[1],\"result\":true}\n"
    "{\"kind\":\"ret\",\"id\":2,\"obj\":\"s\",\"op\":\"remove\",\"args\":[1],\"result\":false}\n"
    "{\"kind\":\"call\",\"id\":3,\"obj\":\"s\",\"op\":\"contains\",\"args\":[1],\"result\":true}\n"
    "{\"kind\":\"ret\",\"id\":3,\"obj\":\"s\",\"op\":\"contains\",\"args\":[1],\"result\":true}\n";

int main(void) {
    LinchkHistory *h = NULL;
    LinchkReport *r = NULL;
    LinchkVerdict v;
    char *json = NULL;

    if (linchk_history_parse((const uint8_t *)INSERT_REMOVE, strlen(INSERT_REMOVE), false, &h) != LINCHK_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", linchk_last_error());
        return 10;
    }
    if (linchk_check(h, "set", "wgl", 0, 0, 0, true, &r) != LINCHK_STATUS_OK) {
        fprintf(stderr, "check: %s\n", linchk_last_error());
        return 11;
    }
    if (linchk_report_verdict(r, &v) != LINCHK_STATUS_OK || v != LINCHK_VERDICT_LINEARIZABLE) {
        return 12;
    }
    if (linchk_report_json(r, &json) != LINCHK_STATUS_OK || strstr(json, "\"schema_version\": 1") == NULL) {
        return 13;
    }
    linchk_string_free(json);
    linchk_report_free(r);

    if (linchk_check(h, "stack", NULL, 0, 0, 0, false, &r) != LINCHK_STATUS_SPEC_ERROR || linchk_last_error() == NULL) {
        return 14;
    }
    linchk_history_free(h);
    printf("linchk %s ok\n", linchk_version());
    return 0;
}
