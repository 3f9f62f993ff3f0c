int main(void) {
    int x = 0;
    while (x < 100) {
        int step = __VERIFIER_nondet_int();
        if (step == 1) {
            x = x + 1;
        } else {
            x = 0;
        }
    }
    return x;
}
