#include <stdio.h>
#include "magorbit.h"

int main(void) {
    MgSpec *spec = NULL;
    if (mg_spec_from_field_2d("x1^2 - x2", "", &spec) != MG_STATUS_OK) {
        fprintf(stderr, "%s\n", mg_last_error_message());
        return 1;
    }
    bool discrete = false;
    size_t dim = 0;
    mg_spec_discreteness(spec, &discrete);
    mg_algebra_dim(spec, &dim);
    double c = 0.0;
    mg_series_constant(1, 1e-12, &c);
    printf("discrete=%d dim=%zu series=%.12f\n", discrete, dim, c);
    mg_spec_free(spec);
    return 0;
}
