int main(void) {
    int i = 0;
    while (i < 4) {
        i = i + 1;
    }
    int y = __VERIFIER_nondet_int();
    while (y > 10) {
        y = y - 1;
        if (y == 12) {
            y = 20;
        }
    }
    return y;
}
