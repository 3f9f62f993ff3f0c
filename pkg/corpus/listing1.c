void complexFunction(void) {
    int j = 0;
    while (j != -2000000000) {
        j = j + 1;
    }
}

int main(void) {
    int callVal = __VERIFIER_nondet_int();
    if (callVal > 0) {
        complexFunction();
    } else {
        int i = 0;
        int b = callVal;
        for (i = 0; i < 10 && callVal < 1;) {
            if (i == 2) {
                i = -1;
            } else {
                i = i + 1;
            }
        }
    }
    return callVal;
}
