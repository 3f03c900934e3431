#include <stdio.h>
#include "padic.h"

int main(void) {
    PadicInstance *inst = NULL;
    PadicVerdict *v = NULL;
    if (padic_instance_parse("vars x\neq x = 9\nval 3 : v(x) >= 2\n", &inst) != PADIC_ERROR_OK) {
        fprintf(stderr, "%s\n", padic_last_error());
        return 3;
    }
    if (padic_solve(inst, 1, &v) != PADIC_ERROR_OK) {
        fprintf(stderr, "%s\n", padic_last_error());
        padic_instance_free(inst);
        return 4;
    }
    char *json = padic_verdict_json(inst, v, true);
    puts(json);
    int code = padic_verdict_status(v) == PADIC_STATUS_SAT ? 0 : 1;
    padic_string_free(json);
    padic_verdict_free(v);
    padic_instance_free(inst);
    return code;
}
