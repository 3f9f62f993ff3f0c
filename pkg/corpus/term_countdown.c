int main(void) {
    unsigned char n = __VERIFIER_nondet_int();
    unsigned char steps = 0;
    while (n != 0 && steps < 8) {
        n = n >> 1;
        steps = steps + 1;
    }
    return steps;
}
