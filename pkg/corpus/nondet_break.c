int main(void) {
    int x = 0;
    while (1) {
        _Bool stop = __VERIFIER_nondet_bool();
        if (stop) {
            break;
        }
        x = 1 - x;
    }
    return x;
}
