int main(void) {
    unsigned char x = 200;
    do {
        x = x + 10;
    } while (x != 201);
    return x;
}
