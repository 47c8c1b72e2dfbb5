/* Solve a small program and query it through the C interface. */
#include <stdio.h>
#include "fourql.h"

static const char *names[] = {"f", "u", "i", "t"};

int main(void) {
    FourqlProgram *program = NULL;
    FourqlModel *model = NULL;
    FourqlTruth value;
    char *json = NULL;

    if (fourql_program_new("a. -a. b :- a. c :- d.", &program) != FOURQL_STATUS_OK) {
        fprintf(stderr, "%s\n", fourql_last_error());
        return 1;
    }
    if (fourql_solve(program, &model) != FOURQL_STATUS_OK) {
        fprintf(stderr, "%s\n", fourql_last_error());
        fourql_program_free(program);
        return 1;
    }
    if (fourql_model_query(model, "main.b", &value) == FOURQL_STATUS_OK) {
        printf("main.b = %s\n", names[value]);
    }
    if (fourql_model_query(model, "main.zzz", &value) != FOURQL_STATUS_OK) {
        printf("error: %s\n", fourql_last_error());
    }
    if (fourql_model_to_json(model, true, &json) == FOURQL_STATUS_OK) {
        printf("%s", json);
        fourql_string_free(json);
    }
    fourql_model_free(model);
    fourql_program_free(program);
    return 0;
}
